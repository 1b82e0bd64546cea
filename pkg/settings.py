import os

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

VERSION = "0.1.0"


class Settings(BaseSettings):
    seed:                 int   = Field(0, ge=0)
    psd_tolerance:        float = Field(1e-9, gt=0)
    perfection_tolerance: float = Field(1e-9, gt=0)
    probes:               int   = Field(1000, ge=1)
    max_witness_probes:   int   = Field(50, ge=4)
    workers:              int   = Field(0, ge=0)      # 0 = one per CPU
    log_level:            str   = "INFO"

    model_config = SettingsConfigDict(env_prefix="EPRLAB_", env_file=".env", extra="ignore")

    def worker_count(self) -> int:
        return self.workers or os.cpu_count() or 1


settings = Settings()
