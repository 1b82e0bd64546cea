import logging

import pytest
from pydantic import ValidationError

from logconfig import new_run_id, setup_logging
from settings import Settings


class TestSettings:
    def test_defaults(self, monkeypatch):
        for name in ("EPRLAB_SEED", "EPRLAB_PROBES", "EPRLAB_WORKERS"):
            monkeypatch.delenv(name, raising=False)
        config = Settings(_env_file=None)
        assert config.seed == 0
        assert config.probes == 1000
        assert config.max_witness_probes == 50
        assert config.worker_count() >= 1

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("EPRLAB_PROBES", "250")
        monkeypatch.setenv("EPRLAB_WORKERS", "3")
        config = Settings(_env_file=None)
        assert config.probes == 250
        assert config.worker_count() == 3

    def test_rejects_negative_seed(self, monkeypatch):
        monkeypatch.setenv("EPRLAB_SEED", "-1")
        with pytest.raises(ValidationError):
            Settings(_env_file=None)


class TestLogging:
    def test_records_carry_run_id(self, capsys):
        setup_logging("DEBUG")
        run_id = new_run_id()
        logging.getLogger("eprlab.test").info("probing")
        err = capsys.readouterr().err
        assert f"[{run_id}]" in err and "probing" in err
