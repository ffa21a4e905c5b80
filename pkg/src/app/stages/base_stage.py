"""
Experiment stage interface.
A stage writes only into its own directory under the experiment root and marks it
complete with a `_SUCCESS` file; `load` rebuilds its context state from those files.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
import shutil
from abc import ABC, abstractmethod
from pathlib import Path

from ..context import ExperimentContext
from ..errors import ConfigError

logger = logging.getLogger(__name__)


class Stage(ABC):
    name: str = ""

    def __init__(self, context: ExperimentContext):
        self._context = context

    @property
    def directory(self) -> Path:
        return self._context.stage_dir(self.name)

    @abstractmethod
    def run(self) -> None:
        """Computes the stage's outputs from the context and writes them."""

    @abstractmethod
    def load(self) -> None:
        """Restores the stage's context state from a completed directory."""

    def execute(self, resume: bool, recompute: bool) -> None:
        """
        :param resume: Reuse a completed directory instead of failing on it.
        :param recompute: Discard any existing directory and run again.
        """
        ctx = self._context
        if recompute and self.directory.exists():
            logger.info(f"♻️ Recomputing stage '{self.name}'.")
            shutil.rmtree(self.directory)
        elif ctx.is_complete(self.name):
            if not resume:
                raise ConfigError(
                    f"stage '{self.name}' already completed in {ctx.root}; use --resume or --from-stage"
                )
            logger.info(f"⏭️ Stage '{self.name}' already complete. Loading outputs.")
            self.load()
            return
        elif self.directory.exists():
            # Leftovers of an interrupted run.
            shutil.rmtree(self.directory)

        logger.info(f"🚀 Stage '{self.name}' started.")
        self.directory.mkdir(parents=True, exist_ok=True)
        self.run()
        ctx.mark_complete(self.name)
        logger.info(f"✅ Stage '{self.name}' complete.")
