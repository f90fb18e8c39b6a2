"""Input-driven quantum reservoirs with temporal and spatial multiplexing.

A single reservoir is a randomly coupled transverse-field Ising system that
receives a scalar input stream through one qubit and is observed through the
single-qubit Z expectations. Temporal multiplexing harvests those signals at
V subdivided intervals per input period; spatial multiplexing runs several
disjoint reservoirs on a common input and concatenates all their signals
into one feature matrix. A classical echo state network is included as a
baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .qcore import (
    DensityMatrix,
    build_ising_hamiltonian,
    input_qubit_state,
    propagator,
    _replace_qubit_raw,
    _z_sign_rows,
)


@dataclass(frozen=True)
class QRSystemConfig:
    """Parameters of one quantum reservoir.

    tau is the dimensionless input interval; virtual_nodes is the number of
    signal harvests per interval; coupling_seed fixes the random couplings.
    """

    n_qubits: int = 5
    tau: float = 1.0
    virtual_nodes: int = 1
    coupling_scale: float = 1.0
    field: float = 1.0
    coupling_seed: int = 0
    input_qubit: int = 0

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be at least 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.virtual_nodes < 1:
            raise ValueError("virtual_nodes must be at least 1")
        if not 0 <= self.input_qubit < self.n_qubits:
            raise ValueError("input_qubit out of range")

    @property
    def n_signals(self) -> int:
        return self.n_qubits * self.virtual_nodes


INITIAL_STATE_POLICIES = ("maximally_mixed", "pure_zero")


def _initial_state(policy: str | DensityMatrix, n_qubits: int) -> DensityMatrix:
    if isinstance(policy, DensityMatrix):
        if policy.n_qubits != n_qubits:
            raise ValueError("initial state has wrong qubit count")
        return policy
    if policy == "maximally_mixed":
        return DensityMatrix.maximally_mixed(n_qubits)
    if policy == "pure_zero":
        return DensityMatrix.pure_zero(n_qubits)
    raise ValueError(f"unknown initial state policy {policy!r}")


class QRSystem:
    """One quantum reservoir with mutable state during a run.

    Not thread-safe; distinct systems may be stepped by concurrent workers.
    """

    def __init__(self, config: QRSystemConfig,
                 initial_state: str | DensityMatrix = "maximally_mixed"):
        self.config = config
        self.hamiltonian = build_ising_hamiltonian(
            config.n_qubits, config.coupling_scale, config.field, config.coupling_seed)
        self.sub_propagator = propagator(
            self.hamiltonian, config.tau / config.virtual_nodes)
        self.state = _initial_state(initial_state, config.n_qubits)
        self._u_sub = self.sub_propagator.matrix
        self._u_sub_dag = self._u_sub.conj().T
        self._z_signs = _z_sign_rows(config.n_qubits)

    def reset(self, initial_state: str | DensityMatrix = "maximally_mixed") -> None:
        self.state = _initial_state(initial_state, self.config.n_qubits)

    def step(self, u: float) -> np.ndarray:
        """Inject one input and advance a full interval tau.

        Returns the V*N signals harvested at the subdivided times, ordered
        with the virtual-node index major and the qubit index minor. The
        final state equals a single full-interval evolution of the injected
        state.
        """
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"input must lie in [0, 1], got {u}")
        cfg = self.config
        rho = _replace_qubit_raw(self.state.entries, input_qubit_state(float(u)),
                                 cfg.input_qubit, cfg.n_qubits)
        n = cfg.n_qubits
        out = np.empty(cfg.n_signals)
        for v in range(cfg.virtual_nodes):
            rho = self._u_sub @ rho @ self._u_sub_dag
            out[v * n:(v + 1) * n] = self._z_signs @ np.real(np.diagonal(rho))
        self.state = DensityMatrix(rho)
        return out

    def run(self, inputs: np.ndarray) -> np.ndarray:
        """Step through a whole input sequence; rows are timesteps."""
        inputs = np.asarray(inputs, dtype=float)
        out = np.empty((len(inputs), self.config.n_signals))
        for k, u in enumerate(inputs):
            out[k] = self.step(u)
        return out


@dataclass(frozen=True)
class EnsembleConfig:
    """Ordered collection of disjoint reservoirs driven by a common input."""

    systems: tuple[QRSystemConfig, ...]

    def __post_init__(self) -> None:
        if len(self.systems) < 1:
            raise ValueError("ensemble needs at least one system")
        object.__setattr__(self, "systems", tuple(self.systems))

    @property
    def order(self) -> int:
        return len(self.systems)

    @property
    def n_total(self) -> int:
        return sum(cfg.n_signals for cfg in self.systems)

    def column_names(self) -> tuple[str, ...]:
        names = []
        for c, cfg in enumerate(self.systems, start=1):
            for v in range(1, cfg.virtual_nodes + 1):
                for q in range(1, cfg.n_qubits + 1):
                    names.append(f"s{c}_v{v}_q{q}")
        return tuple(names)

    @classmethod
    def replicated(cls, base: QRSystemConfig,
                   coupling_seeds: list[int] | tuple[int, ...]) -> "EnsembleConfig":
        """Copies of one configuration that differ only in their couplings."""
        return cls(tuple(replace(base, coupling_seed=int(s)) for s in coupling_seeds))


@dataclass(frozen=True)
class FeatureMatrix:
    """Harvested reservoir signals: rows are input timesteps."""

    values: np.ndarray
    columns: tuple[str, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("feature matrix must be 2-D")
        if values.shape[1] != len(self.columns):
            raise ValueError(
                f"{values.shape[1]} columns but {len(self.columns)} names")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(self.columns) + "\n")
            np.savetxt(fh, self.values, fmt="%.17g", delimiter=",", newline="\n")

    @classmethod
    def from_csv(cls, path) -> "FeatureMatrix":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if not header:
                raise ValueError(f"{path}: empty feature CSV")
            columns = tuple(header.split(","))
            values = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(values=values, columns=columns)


def run_ensemble(ensemble: EnsembleConfig, inputs,
                 initial_state_policy: str | DensityMatrix = "maximally_mixed",
                 ) -> FeatureMatrix:
    """Drive every system with the common input stream and collect signals.

    Each system starts from the same initial-state policy and is stepped
    independently; columns follow the canonical (system, virtual node,
    qubit) order. Deterministic given the coupling seeds.
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 1 or len(inputs) == 0:
        raise ValueError("inputs must be a nonempty 1-D sequence")
    if np.min(inputs) < 0.0 or np.max(inputs) > 1.0:
        raise ValueError("inputs must lie in [0, 1]")
    blocks = [QRSystem(cfg, initial_state_policy).run(inputs)
              for cfg in ensemble.systems]
    return FeatureMatrix(values=np.hstack(blocks), columns=ensemble.column_names())


# ---------------------------------------------------------------------------
# Echo state network baseline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ESNConfig:
    """Random tanh recurrent network used as a classical reference."""

    n_nodes: int
    spectral_radius: float = 0.9
    input_scale: float = 0.01
    weight_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be at least 1")
        if self.spectral_radius <= 0:
            raise ValueError("spectral_radius must be positive")


def build_esn_weights(config: ESNConfig) -> tuple[np.ndarray, np.ndarray]:
    """Internal weights rescaled to the target spectral radius, input weights.

    Internal entries are drawn uniform on [-1, 1] and rescaled so the largest
    absolute eigenvalue equals spectral_radius; a zero-spectral-radius draw
    (probability zero) is redrawn. Input weights are uniform on
    [-input_scale, input_scale].
    """
    for attempt in range(16):
        rng = np.random.default_rng(config.weight_seed + attempt)
        internal = rng.uniform(-1.0, 1.0, size=(config.n_nodes, config.n_nodes))
        radius = float(np.max(np.abs(np.linalg.eigvals(internal))))
        if radius > 0.0:
            internal *= config.spectral_radius / radius
            w_in = rng.uniform(-config.input_scale, config.input_scale,
                               size=config.n_nodes)
            return internal, w_in
    raise RuntimeError("could not draw a weight matrix with nonzero spectral radius")


def esn_run(config: ESNConfig, inputs, initial_state: np.ndarray | None = None,
            ) -> FeatureMatrix:
    """Iterate x_k = tanh(W x_{k-1} + w_in u_k) from the given start state."""
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 1 or len(inputs) == 0:
        raise ValueError("inputs must be a nonempty 1-D sequence")
    internal, w_in = build_esn_weights(config)
    x = np.zeros(config.n_nodes) if initial_state is None \
        else np.asarray(initial_state, dtype=float).copy()
    if x.shape != (config.n_nodes,):
        raise ValueError("initial state has wrong shape")
    out = np.empty((len(inputs), config.n_nodes))
    for k, u in enumerate(inputs):
        x = np.tanh(internal @ x + w_in * u)
        out[k] = x
    columns = tuple(f"n{i}" for i in range(1, config.n_nodes + 1))
    return FeatureMatrix(values=out, columns=columns)
