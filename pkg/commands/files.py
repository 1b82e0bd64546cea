"""Reading state/basis inputs and writing JSON, CSV and run manifests."""

import csv
import hashlib
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple, Type, TypeVar

from pydantic import BaseModel

from errors import InputFormatError, InvalidParameters
from models import BasisFile, DensityMatrixFile, RunManifest, format_float, render_json
from services.qudit import DensityMatrix, OrthonormalBasis, validate_density
from services.states import named_state
from settings import VERSION

M = TypeVar("M", bound=BaseModel)


def file_digest(path: str) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_json(path: str, schema: Type[M]) -> M:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputFormatError(f"cannot read '{path}': {e.strerror}", {"path": path})
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputFormatError(f"malformed JSON in '{path}': {e.msg}",
                               {"path": path, "line": e.lineno, "column": e.colno})
    return schema.model_validate(data)


def load_state(path: Optional[str], state: Optional[str], seed: int,
               psd_tolerance: float) -> Tuple[DensityMatrix, Dict[str, str]]:
    """A density matrix from a JSON file or a built-in ``--state`` name, plus input digests."""
    if (path is None) == (state is None):
        raise InvalidParameters("give exactly one of an input file or --state")
    if path is not None:
        rho = load_json(path, DensityMatrixFile).to_density(psd_tolerance)
        return rho, {path: file_digest(path)}
    rho = named_state(state, seed)
    # built-ins pass through the same gate as file inputs
    rho = validate_density(rho.matrix, rho.local_dim, rho.bipartite, psd_tolerance)
    return rho, {}


def load_basis(spec: Optional[str], d: int, digests: Dict[str, str]) -> Optional[OrthonormalBasis]:
    if spec is None:
        return None
    if spec == "computational":
        return OrthonormalBasis.computational(d)
    if spec == "fourier":
        return OrthonormalBasis.fourier(d)
    digests[spec] = file_digest(spec)
    return load_json(spec, BasisFile).to_basis()


def manifest(command: str, argv: Iterable[str], seed: Optional[int],
             digests: Dict[str, str]) -> RunManifest:
    return RunManifest(command=command, argv=list(argv), seed=seed, version=VERSION,
                       input_digests=digests,
                       timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"))


def _write_manifest(path: str, run: RunManifest):
    Path(f"{path}.manifest.json").write_text(render_json(run))


def emit(payload: BaseModel, out: Optional[str], run: RunManifest):
    """JSON to standard output, or to ``out`` with a manifest next to it."""
    text = render_json(payload)
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text)
    _write_manifest(out, run)
    logging.info(f"Wrote {out} and its manifest")


def write_trials_csv(path: str, values: Iterable[float], run: RunManifest):
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["trial_index", "success_probability"])
        w.writeheader()
        for t, value in enumerate(values):
            w.writerow({"trial_index": t, "success_probability": format_float(float(value))})
    _write_manifest(path, run)
    logging.info(f"Wrote per-trial CSV to {path}")
