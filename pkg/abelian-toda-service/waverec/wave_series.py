"""
Wave coefficient series on a time grid.

xi_s(z, t) = c_s(t) + sum_i sum_j a_{s,i,j}(t) f_j(z - x_i(t)), where f_j are
the Bloch layers (f_1 = zeta(y) - c y carries both the simple pole and the
linear term). The series stores the coefficients and their t-derivatives at
every node together with the particle positions, and interpolates in between.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from special.weierstrass import EllipticLattice
from utils.numeric_utils import NumericUtils
from waverec.elliptic_wave import BlochLayers

logger = logging.getLogger(__name__)

NODE_MATCH = 1e-12


def _encode(values) -> Dict[str, Any]:
    values = np.asarray(values, dtype=complex)
    return {"re": values.real.tolist(), "im": values.imag.tolist()}


def _decode(data: Dict[str, Any]) -> np.ndarray:
    return np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)


def _per_node(values) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    return values[:, None] if values.ndim == 1 else values


class WaveSeries:
    """
    Solution of the wave recursion for an elliptic tau function.

    Args:
        lattice: Elliptic lattice
        U: Shift of the difference equation
        nodes: Increasing t-nodes, shape (T,)
        positions: Particle positions at the nodes, shape (T, N)
        velocities: Particle velocities at the nodes, shape (T, N)
        b: Normalization constant of the time exponent
        constants: c_s at the nodes, shape (S + 1, T); c_0 = 1
        layers: a_{s,i,j} at the nodes, shape (S + 1, T, N, S), j stored at index j - 1
        monodromy: Fitted B_i^lambda per period name, each of shape (T, S)
        diagnostics: Solver residuals and checks
        constant_rates: d/dt c_s at the nodes; grid differences of a uniform grid when omitted
        layer_rates: d/dt a_{s,i,j} at the nodes, same fallback
    """

    def __init__(
        self,
        lattice: EllipticLattice,
        U: complex,
        nodes,
        positions,
        velocities,
        b: complex,
        constants,
        layers,
        monodromy: Optional[Dict[str, np.ndarray]] = None,
        diagnostics: Optional[Dict[str, Any]] = None,
        constant_rates=None,
        layer_rates=None,
    ):
        self.lattice = lattice
        self.U = complex(U)
        self.nodes = np.asarray(nodes, dtype=float)
        self.positions = _per_node(positions)
        self.velocities = _per_node(velocities)
        self.b = complex(b)
        self.constants = np.asarray(constants, dtype=complex)
        self.layers = np.asarray(layers, dtype=complex)
        self.monodromy = {name: np.asarray(v, dtype=complex) for name, v in (monodromy or {}).items()}
        self.diagnostics = dict(diagnostics or {})
        self._bloch = BlochLayers(lattice, max(self.depth, 1))
        self._rates: Optional[tuple] = None
        if constant_rates is not None and layer_rates is not None:
            self._rates = (np.asarray(constant_rates, dtype=complex), np.asarray(layer_rates, dtype=complex))

    @property
    def depth(self) -> int:
        return self.constants.shape[0] - 1

    @property
    def count(self) -> int:
        return self.positions.shape[1]

    @property
    def step(self) -> float:
        return float(self.nodes[1] - self.nodes[0]) if self.nodes.size > 1 else 1.0

    def _node_index(self, t: float) -> Optional[int]:
        hits = np.nonzero(np.abs(self.nodes - t) < NODE_MATCH * max(1.0, abs(t)))[0]
        return int(hits[0]) if hits.size else None

    def _state(self, t: float):
        """(constants, layers, positions, velocities) at time t."""
        k = self._node_index(t)
        if k is not None:
            return self.constants[:, k], self.layers[:, k], self.positions[k], self.velocities[k]
        constants = NumericUtils.interpolate(self.nodes, self.constants.T, t)
        layers = NumericUtils.interpolate(self.nodes, np.moveaxis(self.layers, 1, 0), t)
        positions = NumericUtils.interpolate(self.nodes, self.positions, t)
        velocities = NumericUtils.interpolate(self.nodes, self.velocities, t)
        return constants, layers, positions, velocities

    def _coefficient_rates(self, t: float):
        """Time derivatives of (constants, layers) at t."""
        if self._rates is None:
            self._rates = (
                NumericUtils.grid_derivative(self.constants, self.step, axis=1),
                NumericUtils.grid_derivative(self.layers, self.step, axis=1),
            )
        k = self._node_index(t)
        if k is not None:
            return self._rates[0][:, k], self._rates[1][:, k]
        return (
            NumericUtils.interpolate(self.nodes, self._rates[0].T, t),
            NumericUtils.interpolate(self.nodes, np.moveaxis(self._rates[1], 1, 0), t),
        )

    def xi(self, s: int, z, t: float) -> np.ndarray:
        """xi_s at the points z (any shape, returned flat)."""
        z = np.asarray(z, dtype=complex).reshape(-1)
        constants, layers, positions, _ = self._state(t)
        value = np.full(z.size, constants[s], dtype=complex)
        if self.count == 0 or s == 0:
            return value
        f = self._bloch.values(z[:, None] - positions[None, :]).reshape(-1, z.size, self.count)
        return value + np.einsum("ij,jni->n", layers[s], f[1 : self.depth + 1])

    def xi_stack(self, depth: int, z, t: float) -> np.ndarray:
        """Array (depth + 1, n) of xi_0 .. xi_depth."""
        if depth > self.depth:
            raise ValueError(f"Series holds {self.depth} orders, {depth} requested")
        return np.stack([self.xi(s, z, t) for s in range(depth + 1)])

    def potential(self, z, t: float) -> np.ndarray:
        """u(z, t) = sum_i v_i (zeta(z + U - x_i) - zeta(z - x_i))."""
        z = np.asarray(z, dtype=complex).reshape(-1)
        _, _, positions, velocities = self._state(t)
        y = z[:, None] - positions[None, :]
        zeta = self.lattice.zeta
        return (zeta(y + self.U) - zeta(y)) @ velocities

    def xi_dot(self, s: int, z, t: float) -> np.ndarray:
        """Time derivative of xi_s at fixed z."""
        z = np.asarray(z, dtype=complex).reshape(-1)
        _, layers, positions, velocities = self._state(t)
        constant_rates, layer_rates = self._coefficient_rates(t)
        value = np.full(z.size, constant_rates[s], dtype=complex)
        if self.count == 0 or s == 0:
            return value
        f, f_y = self._bloch.values_and_derivatives(z[:, None] - positions[None, :])
        f = f.reshape(-1, z.size, self.count)[1 : self.depth + 1]
        f_y = f_y.reshape(-1, z.size, self.count)[1 : self.depth + 1]
        moving = layers[s] * velocities[:, None]
        return value + np.einsum("ij,jni->n", layer_rates[s], f) - np.einsum("ij,jni->n", moving, f_y)

    def residues(self, s: int, t: float) -> np.ndarray:
        """Residue of xi_s at each particle."""
        _, layers, _, _ = self._state(t)
        return layers[s] @ self._bloch.pole_weights()[1 : self.depth + 1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lattice": {"omega1": _encode(self.lattice.omega1), "omega2": _encode(self.lattice.omega2)},
            "U": _encode(self.U),
            "b": _encode(self.b),
            "nodes": self.nodes.tolist(),
            "positions": _encode(self.positions),
            "velocities": _encode(self.velocities),
            "constants": _encode(self.constants),
            "layers": _encode(self.layers),
            "monodromy": {name: _encode(v) for name, v in self.monodromy.items()},
            "constant_rates": _encode(self._rates[0]) if self._rates else None,
            "layer_rates": _encode(self._rates[1]) if self._rates else None,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "WaveSeries":
        lattice = EllipticLattice(complex(_decode(data["lattice"]["omega1"])), complex(_decode(data["lattice"]["omega2"])))
        return cls(
            lattice,
            complex(_decode(data["U"])),
            data["nodes"],
            _decode(data["positions"]),
            _decode(data["velocities"]),
            complex(_decode(data["b"])),
            _decode(data["constants"]),
            _decode(data["layers"]),
            {name: _decode(v) for name, v in data.get("monodromy", {}).items()},
            constant_rates=_decode(data["constant_rates"]) if data.get("constant_rates") else None,
            layer_rates=_decode(data["layer_rates"]) if data.get("layer_rates") else None,
        )

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict()))
        logger.info(f"Wave series (depth {self.depth}, {self.nodes.size} nodes) written to {path}")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "WaveSeries":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __repr__(self) -> str:
        return f"WaveSeries(depth={self.depth}, particles={self.count}, nodes={self.nodes.size})"
