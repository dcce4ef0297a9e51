from __future__ import annotations

from typing import Any

import wandb


class WandbLiaison:
    """
    Forwards experiment metrics to wandb. A liaison without a project makes no wandb calls at all.
    """

    def __init__(self, project: str | None, entity: str | None = None):
        self.project = project
        self.entity = entity
        self.run = None

    @property
    def enabled(self) -> bool:
        return self.project is not None

    def init(self, **kwargs):
        if self.enabled:
            self.run = wandb.init(project=self.project, entity=self.entity, reinit=True, **kwargs)

    def log_dictionary(self, values: dict[str, Any]):
        if self.enabled:
            wandb.log(values, commit=False)

    def commit(self):
        if self.enabled:
            wandb.log({}, commit=True)

    def log_hyperparameter_dictionary(self, hyperparameters: dict[str, Any]):
        if self.enabled:
            wandb.config.update(hyperparameters)

    def finish(self):
        if self.enabled and self.run is not None:
            self.run.finish()
            self.run = None
