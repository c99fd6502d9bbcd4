from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_prefix="SPORADIC_", extra="ignore")

    log_level: str = Field(default="INFO")
    # False switches to one plain text line per record
    log_json: bool = Field(default=True)
    output_dir: str = Field(default="runs")
    # Number of diagnostic lines echoed for skipped ingest records
    ingest_skip_samples: int = Field(default=5)


settings = Settings()
