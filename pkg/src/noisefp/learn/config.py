from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError

NETWORK_LEARNING_RATE = 1.0
CNN_LEARNING_RATE = 0.1
NETWORK_EPOCHS = 30
SOFTMAX_EPOCHS = 300
HIDDEN_WIDTH = 256
LOSSES = ("squared", "cross_entropy")


@dataclass(frozen=True)
class TrainConfig:
    """Optimiser settings shared by every trainer.

    ``learning_rate=None`` picks the per-model default: 1.0 for the
    networks, and for full-batch softmax regression the step ``1/L`` where
    ``L`` bounds the curvature of the cost on the training set (so every
    step lowers the cost).  ``epochs=None`` means 30 for the networks and
    300 full-batch steps for softmax.  ``lam`` is the softmax weight-decay
    coefficient; ``loss`` selects the network objective.
    """

    learning_rate: float | None = None
    epochs: int | None = None
    batch_size: int = 64
    seed: int = 0
    lam: float = 1e-4
    loss: str = "squared"

    def __post_init__(self):
        if self.learning_rate is not None and not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if (self.epochs is not None and self.epochs < 1) or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be positive")
        if self.lam < 0:
            raise ConfigError(f"lam must be >= 0, got {self.lam}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if self.loss not in LOSSES:
            raise ConfigError(f"loss must be one of {LOSSES}, got {self.loss!r}")

    def rate(self, default):
        return default if self.learning_rate is None else self.learning_rate

    def steps(self, default):
        return default if self.epochs is None else self.epochs
