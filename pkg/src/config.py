from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

load_dotenv()


class Settings(BaseSettings):
    seed: Optional[int] = None
    log_level: str = "INFO"
    log_file: Optional[str] = None
    workers: int = 1
    check_tolerance: float = 1e-4
    check_step: float = 1e-5

    model_config = SettingsConfigDict(
        env_prefix="ITTT_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )


settings = Settings()
