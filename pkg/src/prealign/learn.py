"""Backward passes, the Adam optimizer, and the supervised training loop.

Two backward rules share one implementation and differ in a single line.
Backpropagation carries the error downward through the transposed forward
weights; feedback alignment replaces that factor with the network's fixed
random feedback matrices:

    BP:  delta_l = (delta_{l+1} @ W_{l+1})   * relu'(o_l)
    FA:  delta_l = (delta_{l+1} @ B_{l+1}.T) * relu'(o_l)

with ``relu'(0) := 0``.  The output delta is ``probabilities - one_hot``
divided by the batch size, the fused gradient of mean cross-entropy through
softmax.  Setting ``B = W.T`` makes the two rules bitwise identical, which
the tests assert.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError, ShapeError
from .net import Mlp, ForwardTrace, _check_labels, accuracy, cross_entropy, forward
from .records import RunRecord
from .seeds import rng_for

__all__ = [
    "Gradients",
    "AdamState",
    "TrainConfig",
    "backward_bp",
    "backward_fa",
    "adam_step",
    "evaluate",
    "train",
]

_RULES = ("BP", "FA")


@dataclass
class Gradients:
    """Loss gradients for every weight matrix and bias vector, in layer
    order and with the parameter shapes."""

    d_weights: list[np.ndarray]
    d_biases: list[np.ndarray]


@dataclass
class AdamState:
    """Adam moment accumulators, one pair per parameter tensor."""

    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m_weights: list[np.ndarray] = field(default_factory=list, repr=False)
    v_weights: list[np.ndarray] = field(default_factory=list, repr=False)
    m_biases: list[np.ndarray] = field(default_factory=list, repr=False)
    v_biases: list[np.ndarray] = field(default_factory=list, repr=False)

    @classmethod
    def for_mlp(cls, mlp: Mlp, beta1: float = 0.9, beta2: float = 0.999,
                epsilon: float = 1e-8) -> "AdamState":
        return cls(
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
            step=0,
            m_weights=[np.zeros_like(w) for w in mlp.weights],
            v_weights=[np.zeros_like(w) for w in mlp.weights],
            m_biases=[np.zeros_like(b) for b in mlp.biases],
            v_biases=[np.zeros_like(b) for b in mlp.biases],
        )


@dataclass
class TrainConfig:
    """Settings for the supervised loop.

    ``rule`` picks the backward pass (``"BP"`` or ``"FA"``).  ``patience``,
    when set, stops training after that many consecutive epochs without an
    improvement in test accuracy.
    """

    rule: str = "FA"
    learning_rate: float = 1e-4
    batch_size: int = 64
    epochs: int = 100
    patience: int | None = None
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self) -> None:
        if self.rule not in _RULES:
            raise ConfigError(f"rule must be one of {_RULES}, got {self.rule!r}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.patience is not None and self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")


def _backward(mlp: Mlp, trace: ForwardTrace, labels, use_feedback: bool) -> Gradients:
    y = _check_labels(trace.probabilities, labels)
    n = trace.probabilities.shape[0]
    if len(trace.pre_activations) != mlp.n_layers:
        raise ShapeError(
            f"trace has {len(trace.pre_activations)} layers, network has "
            f"{mlp.n_layers}"
        )
    delta = trace.probabilities.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    d_weights = [None] * mlp.n_layers
    d_biases = [None] * mlp.n_layers
    for l in range(mlp.n_layers - 1, -1, -1):
        d_weights[l] = delta.T @ trace.activations[l]
        d_biases[l] = delta.sum(axis=0)
        if l > 0:
            if use_feedback:
                carried = delta @ mlp.feedback[l].T
            else:
                carried = delta @ mlp.weights[l]
            delta = carried * (trace.pre_activations[l - 1] > 0)
    return Gradients(d_weights=d_weights, d_biases=d_biases)


def backward_bp(mlp: Mlp, trace: ForwardTrace, labels) -> Gradients:
    """Exact cross-entropy gradients by backpropagation."""
    return _backward(mlp, trace, labels, use_feedback=False)


def backward_fa(mlp: Mlp, trace: ForwardTrace, labels) -> Gradients:
    """Feedback-alignment update directions: the backward pass uses the fixed
    random matrices ``B_l`` in place of the transposed forward weights.  The
    output layer's gradient is exact; hidden gradients are not, by design."""
    return _backward(mlp, trace, labels, use_feedback=True)


def adam_step(mlp: Mlp, state: AdamState, grads: Gradients, learning_rate: float) -> None:
    """One bias-corrected Adam update, applied in place to ``mlp`` and
    ``state``.  Touches weights and biases only; feedback matrices stay
    fixed for the life of the network."""
    if learning_rate <= 0:
        raise ConfigError(f"learning_rate must be > 0, got {learning_rate}")
    if len(grads.d_weights) != len(mlp.weights):
        raise ShapeError(
            f"gradients cover {len(grads.d_weights)} layers, network has "
            f"{len(mlp.weights)}"
        )
    for g, w in zip(grads.d_weights, mlp.weights):
        if g.shape != w.shape:
            raise ShapeError(f"gradient shape {g.shape} != weight shape {w.shape}")
    for g, b in zip(grads.d_biases, mlp.biases):
        if g.shape != b.shape:
            raise ShapeError(f"gradient shape {g.shape} != bias shape {b.shape}")
    state.step += 1
    t = state.step
    scale_m = 1.0 / (1.0 - state.beta1**t)
    scale_v = 1.0 / (1.0 - state.beta2**t)
    params = list(zip(mlp.weights, grads.d_weights, state.m_weights, state.v_weights))
    params += list(zip(mlp.biases, grads.d_biases, state.m_biases, state.v_biases))
    for p, g, m, v in params:
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        # a blown-up gradient surfaces as NumericError, not a runtime warning
        with np.errstate(invalid="ignore", over="ignore"):
            p -= learning_rate * (m * scale_m) / (np.sqrt(v * scale_v) + state.epsilon)
        if not np.all(np.isfinite(p)):
            raise NumericError("parameters became NaN or Inf during Adam update")


def evaluate(mlp: Mlp, inputs, labels) -> tuple[float, float]:
    """Mean cross-entropy and accuracy of the network on a full split."""
    trace = forward(mlp, inputs)
    return cross_entropy(trace.probabilities, labels), accuracy(
        trace.probabilities, labels
    )


def _check_split(name: str, x: np.ndarray, y: np.ndarray, mlp: Mlp) -> None:
    if x.ndim != 2 or x.shape[0] == 0:
        raise ConfigError(f"{name} inputs must be a nonempty 2-D array")
    if x.shape[0] != y.shape[0]:
        raise ConfigError(
            f"{name} has {x.shape[0]} inputs but {y.shape[0]} labels"
        )
    if x.shape[1] != mlp.dims[0]:
        raise ConfigError(
            f"{name} feature count {x.shape[1]} != network input {mlp.dims[0]}"
        )


def train(
    mlp: Mlp,
    train_inputs,
    train_labels,
    test_inputs,
    test_labels,
    config: TrainConfig,
    trial: int = 0,
    phase: str = "train",
    snapshot_hook=None,
) -> list[RunRecord]:
    """Minibatch training with Adam, updating ``mlp`` in place.

    Each epoch visits every training sample once in a freshly shuffled order
    (the last batch may be short), then evaluates both splits and appends one
    :class:`RunRecord`.  ``snapshot_hook(epoch, mlp)`` may return extra
    scalars to merge into that epoch's metrics.  Early stopping, when
    ``config.patience`` is set, triggers after ``patience`` consecutive
    epochs without a new best test accuracy; the best value seen is logged
    in each record under ``best_test_acc``.
    """
    x_train = np.asarray(train_inputs, dtype=np.float64)
    y_train = np.asarray(train_labels)
    x_test = np.asarray(test_inputs, dtype=np.float64)
    y_test = np.asarray(test_labels)
    _check_split("train", x_train, y_train, mlp)
    _check_split("test", x_test, y_test, mlp)
    rng = rng_for(config.seed, "shuffle")
    adam = AdamState.for_mlp(mlp)
    backward = backward_fa if config.rule == "FA" else backward_bp
    records: list[RunRecord] = []
    n = x_train.shape[0]
    best_acc = -np.inf
    stalled = 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            trace = forward(mlp, x_train[idx])
            grads = backward(mlp, trace, y_train[idx])
            adam_step(mlp, adam, grads, config.learning_rate)
        train_loss, train_acc = evaluate(mlp, x_train, y_train)
        test_loss, test_acc = evaluate(mlp, x_test, y_test)
        if test_acc > best_acc:
            best_acc = test_acc
            stalled = 0
        else:
            stalled += 1
        metrics = {"best_test_acc": best_acc}
        if snapshot_hook is not None:
            extra = snapshot_hook(epoch, mlp)
            if extra:
                metrics.update({k: float(v) for k, v in extra.items()})
        records.append(
            RunRecord(
                trial=trial,
                phase=phase,
                epoch=epoch,
                train_loss=train_loss,
                test_loss=test_loss,
                train_acc=train_acc,
                test_acc=test_acc,
                seed=config.seed,
                metrics=metrics,
            )
        )
        if config.patience is not None and stalled >= config.patience:
            break
    return records
