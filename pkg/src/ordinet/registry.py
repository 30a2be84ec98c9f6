"""Benchmark method registry.

Ten estimator templates, each binding a (head, loss, dropout) combination
plus its hyperparameter search grid:

- ce_baseline: softmax head, plain cross-entropy
- beta / binomial / exponential / triangular: softmax head, cross-entropy
  against the matching blended soft-label table
- clm: cumulative link head, cross-entropy
- clmwk: cumulative link head, weighted-kappa loss
- sb: stick-breaking head, cross-entropy
- obdecoc: binary-decomposition head, template MSE
- hybrid_dropout: softmax head, cross-entropy, correlation-aware dropout

Grids: learning rate {1e-4, 1e-3, 1e-2} everywhere; smoothing factor
{0.8, 1.0} for the four soft-label methods; exponent {1.0, 1.5, 2.0} for
exponential; adjacent-class probability {0.01, 0.05, 0.10} for triangular.
"""

from dataclasses import dataclass, field

from .dropout import HybridDropoutConfig
from .losses import WK, EcocMse, SoftCE
from .nn_core import ModelSpec
from . import soft_labels

LEARNING_RATES = [1e-4, 1e-3, 1e-2]
ETAS = [0.8, 1.0]
EXPONENTS = [1.0, 1.5, 2.0]
ALPHAS = [0.01, 0.05, 0.10]

BETA_CONCENTRATION = 10.0
DROPOUT_RATE = 0.2
DROPOUT_MIX = 0.5

METHODS = (
    "ce_baseline",
    "beta",
    "binomial",
    "exponential",
    "triangular",
    "clm",
    "clmwk",
    "sb",
    "obdecoc",
    "hybrid_dropout",
)


@dataclass
class EstimatorConfig:
    method: str
    hyperparameters: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        for name in self.grid:
            if name not in self.hyperparameters:
                raise ValueError(
                    f"{self.method}: grid entry {name!r} is not a declared hyperparameter"
                )


def registry() -> list:
    """Fresh EstimatorConfig templates for all ten methods."""
    out = []
    for method in METHODS:
        hp = {"learning_rate": 1e-3}
        grid = {"learning_rate": list(LEARNING_RATES)}
        if method in ("beta", "binomial", "exponential", "triangular"):
            hp["eta"] = 1.0
            grid["eta"] = list(ETAS)
        if method == "exponential":
            hp["exponent"] = 1.0
            grid["exponent"] = list(EXPONENTS)
        if method == "triangular":
            hp["alpha"] = 0.05
            grid["alpha"] = list(ALPHAS)
        out.append(EstimatorConfig(method, hp, grid))
    return out


def grid_size(config: EstimatorConfig) -> int:
    size = 1
    for values in config.grid.values():
        size *= len(values)
    return size


def build_loss(method: str, hyperparameters: dict, num_classes: int):
    """Loss object for a method under concrete hyperparameter values."""
    eta = hyperparameters.get("eta", 1.0)
    if method in ("ce_baseline", "hybrid_dropout"):
        return SoftCE(soft_labels.onehot_table(num_classes), eta=1.0)
    if method == "beta":
        return SoftCE(soft_labels.beta_table(num_classes, BETA_CONCENTRATION), eta=eta)
    if method == "binomial":
        return SoftCE(soft_labels.binomial_table(num_classes), eta=eta)
    if method == "exponential":
        table = soft_labels.exponential_table(num_classes, hyperparameters["exponent"])
        return SoftCE(table, eta=eta)
    if method == "triangular":
        table = soft_labels.triangular_table(num_classes, hyperparameters["alpha"])
        return SoftCE(table, eta=eta)
    if method in ("clm", "sb"):
        return SoftCE(soft_labels.onehot_table(num_classes), eta=0.0)
    if method == "clmwk":
        return WK()
    if method == "obdecoc":
        return EcocMse()
    raise ValueError(f"unknown method {method!r}")


def build_spec(
    method: str,
    input_dim: int,
    num_classes: int,
    hidden_dims=(32,),
    activation: str = "relu",
) -> ModelSpec:
    """Model spec for a method (head choice plus optional dropout)."""
    head = "softmax"
    if method in ("clm", "clmwk"):
        head = "clm"
    elif method == "sb":
        head = "stick_breaking"
    elif method == "obdecoc":
        head = "obd"
    dropout = None
    if method == "hybrid_dropout":
        dropout = HybridDropoutConfig(base_rate=DROPOUT_RATE, mix=DROPOUT_MIX)
    return ModelSpec(
        input_dim=input_dim,
        hidden_dims=tuple(hidden_dims),
        num_classes=num_classes,
        activation=activation,
        head=head,
        dropout=dropout,
    )
