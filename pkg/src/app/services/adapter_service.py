"""
Adapter Service.
Runs an external model runner (segmenter, generator, annotator, detector) as a subprocess:
1. Writes the request document into the call's output directory.
2. Invokes the configured command with the request path and output directory.
3. Validates the response document and every file it references.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import json
import logging
import os
import subprocess
import sys
import time
from pathlib import Path
from typing import TypeVar

from pydantic import BaseModel, ValidationError

from ..adapters.schemas import REQUEST_FILE, RESPONSE_FILE, SCHEMA_VERSION, AdapterDocument
from ..errors import AdapterFailure, AdapterTimeout, IoFailure, SchemaViolation
from ..settings import AdapterSpec

logger = logging.getLogger(__name__)

ResponseT = TypeVar("ResponseT", bound=AdapterDocument)

RETRY_DELAY_SECONDS = 1.0
DIAGNOSTICS_TAIL_CHARS = 4000

# Directory holding the `app` package, so `-m app.adapters.stubs` resolves in the child.
PACKAGE_ROOT = Path(__file__).resolve().parents[2]


class AdapterService:
    """
    Invokes one configured adapter. Thread-safe: every call owns its output directory.
    """

    def __init__(self, spec: AdapterSpec):
        self._spec = spec

    @property
    def spec(self) -> AdapterSpec:
        return self._spec

    def _command(self, request_path: Path, output_dir: Path) -> list[str]:
        values = {"python": sys.executable, "request": str(request_path), "output_dir": str(output_dir)}
        return [part.format(**values) for part in self._spec.command]

    def _environment(self) -> dict[str, str]:
        env = dict(os.environ)
        paths = [str(PACKAGE_ROOT), env.get("PYTHONPATH", "")]
        env["PYTHONPATH"] = os.pathsep.join(p for p in paths if p)
        return env

    def run(self, request: BaseModel, response_model: type[ResponseT], output_dir: Path) -> ResponseT:
        """
        Runs the adapter once per attempt until it succeeds or attempts run out.

        :param request: Role-specific request document.
        :param response_model: Schema the adapter's response must satisfy.
        :param output_dir: Directory for the request, the response and every produced file.
        :raises AdapterTimeout: the process outlived `spec.timeout`.
        :raises AdapterFailure: non-zero exit, with the captured stderr.
        :raises SchemaViolation: missing or invalid response, or a referenced file is absent.
        """
        output_dir = output_dir.resolve()
        try:
            output_dir.mkdir(parents=True, exist_ok=True)
            request_path = output_dir / REQUEST_FILE
            request_path.write_text(json.dumps(request.model_dump(mode="json"), indent=2, sort_keys=True) + "\n")
        except OSError as e:
            raise IoFailure(f"cannot prepare adapter directory '{output_dir}': {e}") from e

        attempts = self._spec.retry_attempts
        for attempt in range(1, attempts + 1):
            try:
                self._invoke(request_path, output_dir)
                return self._read_response(response_model, output_dir)
            except (AdapterFailure, AdapterTimeout) as e:
                if attempt == attempts:
                    raise
                logger.warning(f"⚠️ {self._spec.label} attempt {attempt}/{attempts} failed ({e}). Retrying...")
                time.sleep(RETRY_DELAY_SECONDS)
        raise AssertionError("unreachable")

    def _invoke(self, request_path: Path, output_dir: Path):
        cmd = self._command(request_path, output_dir)
        logger.debug(f"🔌 {self._spec.label}: {' '.join(cmd)}")
        try:
            proc = subprocess.run(
                cmd,
                cwd=self._spec.workdir,
                env=self._environment(),
                capture_output=True,
                text=True,
                timeout=self._spec.timeout,
                check=False,
            )
        except subprocess.TimeoutExpired:
            raise AdapterTimeout(self._spec.label, self._spec.timeout) from None
        except OSError as e:
            raise AdapterFailure(self._spec.label, -1, f"cannot start '{cmd[0]}': {e}") from e

        if proc.returncode != 0:
            raise AdapterFailure(self._spec.label, proc.returncode, proc.stderr[-DIAGNOSTICS_TAIL_CHARS:])

    def _read_response(self, response_model: type[ResponseT], output_dir: Path) -> ResponseT:
        response_path = output_dir / RESPONSE_FILE
        if not response_path.exists():
            raise SchemaViolation(f"{self._spec.label} exited 0 without writing {RESPONSE_FILE}")
        try:
            response = response_model.model_validate_json(response_path.read_text())
        except (OSError, ValidationError) as e:
            raise SchemaViolation(f"{self._spec.label} response does not match {response_model.__name__}: {e}") from e

        if response.schema_version != SCHEMA_VERSION:
            raise SchemaViolation(f"{self._spec.label} answered with schema version {response.schema_version}")
        for name in response.referenced_files():
            path = output_dir / name
            if Path(name).is_absolute() or ".." in Path(name).parts or not path.is_file():
                raise SchemaViolation(f"{self._spec.label} response references missing file '{name}'")
        return response
