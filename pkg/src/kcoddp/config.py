"""Run configuration with documented defaults."""

from dataclasses import dataclass, field, fields, replace

SCALE_NAMES = (
    "V", "z", "theta1", "theta2",
    "phi", "a_delta", "b_psi", "log_alpha", "log_lambda", "tau", "log_sigma",
    "w_psi1", "w_psi2", "w_log_delta",
)


@dataclass(frozen=True)
class RunConfig:
    """
    Sampler settings.

    ``scales`` holds the fourteen additive scales in :data:`SCALE_NAMES`
    order; ``split_scales`` the split innovation scales of the four variable
    blocks (``None`` reuses the first four additive scales); ``reg_scales``
    the scales of the regression intercept and slope.
    """

    seed: int = None
    n_iter: int = 20000
    burn_in: int = 5000
    thin: int = 1
    k_init: int = 15
    k_max: int = 30
    scales: tuple = (0.1,) * 14
    split_scales: tuple = (1.0, 1.0, 1.0, 1.0)
    reg_scales: tuple = (0.1, 0.1)
    move_weights: tuple = (1 / 3, 1 / 3, 1 / 3)
    epsilon: float = 0.01
    n0: float = 1.0
    eta: float = 2.0
    b_lambda: float = 20.0
    A: float = 3.5
    bounds: tuple = (3.0, 200.0)
    ordering_mode: str = "spacetime"
    n_chains: int = 1
    box_alpha: float = 1.0
    box_lambda: float = 1.0
    init: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.scales) != len(SCALE_NAMES):
            raise ValueError(f"expected {len(SCALE_NAMES)} scales, got {len(self.scales)}")
        if self.n_iter <= self.burn_in:
            raise ValueError("n_iter must exceed burn_in")
        if self.thin < 1 or self.burn_in < 0:
            raise ValueError("thin must be >= 1 and burn_in >= 0")
        if not 1 <= self.k_init <= self.k_max:
            raise ValueError("k_init must lie in 1..k_max")

    def replace(self, **kw):
        return replace(self, **kw)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]
