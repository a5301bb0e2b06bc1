"""
Structured grids for the two coupled fluids, the fast / buffer / slow partition,
and the state containers the integrator advances.

Arrays are stored as (5, nz, ny, nx) so x varies fastest. Omega_1 lies below the
interface plane z = 0 and is the fast region; Omega_2 lies above it and is split
into a buffer band touching the interface and a slow band on top.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from mprk.solver.config import ConfigError
from mprk.solver.physics import FluidParams, NonPhysicalState, conserved_to_primitive

logger = logging.getLogger(__name__)

BOUNDARY_KINDS = ("wall", "periodic", "interface", "cut")
AXES = ("x", "y", "z")


@dataclass(frozen=True)
class StructuredGrid:
    nx: int
    ny: int
    nz: int
    dx: float
    dy: float
    dz: float
    origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            if getattr(self, name) < 1:
                raise ConfigError(f"grid.{name}: must be >= 1")
        for name in ("dx", "dy", "dz"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"grid.{name}: must be positive")

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.nz, self.ny, self.nx)

    @property
    def counts(self) -> Tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def spacing(self) -> Tuple[float, float, float]:
        return (self.dx, self.dy, self.dz)

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def volume(self) -> float:
        """Element measure |K|."""
        return self.dx * self.dy * self.dz

    @property
    def is_3d(self) -> bool:
        return self.ny > 1

    def active_axes(self) -> Tuple[int, ...]:
        return tuple(d for d in range(3) if self.counts[d] > 1)

    def axis_coordinates(self, axis: int) -> np.ndarray:
        n, h, x0 = self.counts[axis], self.spacing[axis], self.origin[axis]
        return x0 + (np.arange(n) + 0.5) * h

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(X, Y, Z) arrays shaped (nz, ny, nx)."""
        z, y, x = np.meshgrid(
            self.axis_coordinates(2), self.axis_coordinates(1), self.axis_coordinates(0),
            indexing="ij",
        )
        return x, y, z

    def face_centers(self, axis: int, index: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Centers of the faces normal to `axis` at face index 0..n."""
        coords = [self.axis_coordinates(d) for d in range(3)]
        coords[axis] = np.array([self.origin[axis] + index * self.spacing[axis]])
        z, y, x = np.meshgrid(coords[2], coords[1], coords[0], indexing="ij")
        return x, y, z

    def layers(self, start: int, stop: int) -> "StructuredGrid":
        """Sub-grid made of z-layers [start, stop)."""
        return replace(
            self,
            nz=stop - start,
            origin=(self.origin[0], self.origin[1], self.origin[2] + start * self.dz),
        )


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary kind per axis side: ((x_lo, x_hi), (y_lo, y_hi), (z_lo, z_hi))."""
    sides: Tuple[Tuple[str, str], Tuple[str, str], Tuple[str, str]]

    def __post_init__(self):
        for axis, (lo, hi) in enumerate(self.sides):
            for kind in (lo, hi):
                if kind not in BOUNDARY_KINDS:
                    raise ConfigError(f"bc.{AXES[axis]}: unknown kind '{kind}'")
            if (lo == "periodic") != (hi == "periodic"):
                raise ConfigError(f"bc.{AXES[axis]}: periodic must be set on both sides")

    def kind(self, axis: int, side: int) -> str:
        return self.sides[axis][side]

    def is_periodic(self, axis: int) -> bool:
        return self.sides[axis][0] == "periodic"

    def with_z(self, lo: str, hi: str) -> "BoundarySpec":
        return BoundarySpec((self.sides[0], self.sides[1], (lo, hi)))


@dataclass(frozen=True)
class RegionPartition:
    """Omega_1 is entirely fast; Omega_2 = buffer layers [0, nb) + slow layers [nb, nz2)."""
    slow_layers: int
    buffer_layers: int
    grid1_region: str = "fast"

    def __post_init__(self):
        if self.buffer_layers < 1:
            raise ConfigError("domain.buffer_layers: must be >= 1")
        if self.slow_layers < 0:
            raise ConfigError("domain.slow_layers: must be >= 0")

    @property
    def nz2(self) -> int:
        return self.slow_layers + self.buffer_layers

    def buffer_slice(self) -> slice:
        return slice(0, self.buffer_layers)

    def slow_slice(self) -> slice:
        return slice(self.buffer_layers, self.nz2)


@dataclass(frozen=True)
class DomainConfig:
    x: Tuple[float, float]
    y: Tuple[float, float]
    z1: Tuple[float, float]
    z2: Tuple[float, float]
    cells1: Tuple[int, int, int]
    cells2: Tuple[int, int, int]
    buffer_layers: int = 6
    lateral_bc: str = "wall"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DomainConfig":
        try:
            return cls(
                x=tuple(float(v) for v in data["x"]),
                y=tuple(float(v) for v in data["y"]),
                z1=tuple(float(v) for v in data["z1"]),
                z2=tuple(float(v) for v in data["z2"]),
                cells1=tuple(int(v) for v in data["cells1"]),
                cells2=tuple(int(v) for v in data["cells2"]),
                buffer_layers=int(data.get("buffer_layers", 6)),
                lateral_bc=data.get("lateral_bc", "wall"),
            )
        except KeyError as exc:
            raise ConfigError(f"domain.{exc.args[0]}: required field is missing") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"domain: malformed value ({exc})") from exc


@dataclass
class ConservedField:
    grid: StructuredGrid
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        expected = (5,) + self.grid.shape
        if self.data.shape != expected:
            raise ValueError(f"field shape {self.data.shape} does not match grid {expected}")

    @classmethod
    def zeros(cls, grid: StructuredGrid) -> "ConservedField":
        return cls(grid, np.zeros((5,) + grid.shape))

    def copy(self) -> "ConservedField":
        return ConservedField(self.grid, self.data.copy())

    def validity_scan(self, params: FluidParams, domain: Optional[int] = None) -> None:
        """Raises NonPhysicalState if any element has rho, p or T <= 0."""
        prim = conserved_to_primitive(self.data, params, domain=domain)
        bad = ~(prim.T > 0.0)
        if np.any(bad):
            element = tuple(int(i) for i in np.argwhere(bad)[0])
            raise NonPhysicalState("non-positive temperature", domain, element)


@dataclass
class CoupledState:
    field1: ConservedField
    field2: ConservedField
    t: float = 0.0

    def copy(self) -> "CoupledState":
        return CoupledState(self.field1.copy(), self.field2.copy(), self.t)


@dataclass(frozen=True)
class CoupledProblem:
    """Everything the right-hand sides need besides the state."""
    grid1: StructuredGrid
    grid2: StructuredGrid
    partition: RegionPartition
    fluid1: FluidParams
    fluid2: FluidParams
    bc1: BoundarySpec
    bc2: BoundarySpec
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def is_3d(self) -> bool:
        return self.grid1.is_3d

    def element_counts(self) -> Tuple[int, int, int, int]:
        return region_element_counts(self.partition, (self.grid1, self.grid2))


def build_coupled_domain(config: DomainConfig) -> Tuple[StructuredGrid, StructuredGrid, RegionPartition]:
    """Two conformal grids sharing the plane z = 0 plus the Omega_2 partition."""
    (x0, x1), (y0, y1) = config.x, config.y
    (za, zb), (zc, zd) = config.z1, config.z2
    nx1, ny1, nz1 = config.cells1
    nx2, ny2, nz2 = config.cells2

    if (nx1, ny1) != (nx2, ny2):
        raise ConfigError(
            f"domain.cells: horizontal discretizations differ ({nx1}x{ny1} vs {nx2}x{ny2})"
        )
    if zb != 0.0 or zc != 0.0:
        raise ConfigError("domain.z1/z2: both subdomains must meet at the interface z = 0")
    if not (x1 > x0 and y1 > y0 and zb > za and zd > zc):
        raise ConfigError("domain: extents must be increasing intervals")
    if config.buffer_layers > nz2:
        raise ConfigError(
            f"domain.buffer_layers: {config.buffer_layers} exceeds Omega_2 vertical count {nz2}"
        )

    dx = (x1 - x0) / nx1
    dy = (y1 - y0) / ny1
    grid1 = StructuredGrid(nx1, ny1, nz1, dx, dy, (zb - za) / nz1, (x0, y0, za))
    grid2 = StructuredGrid(nx2, ny2, nz2, dx, dy, (zd - zc) / nz2, (x0, y0, zc))
    partition = RegionPartition(slow_layers=nz2 - config.buffer_layers,
                                buffer_layers=config.buffer_layers)
    logger.debug(f"built grids {grid1.shape} / {grid2.shape} with {config.buffer_layers} buffer layers")
    return grid1, grid2, partition


def coupled_boundaries(lateral: str) -> Tuple[BoundarySpec, BoundarySpec]:
    """Lateral kind on x and y; wall at the outer z ends, interface at z = 0."""
    lateral_pair = (lateral, lateral)
    bc1 = BoundarySpec((lateral_pair, lateral_pair, ("wall", "interface")))
    bc2 = BoundarySpec((lateral_pair, lateral_pair, ("interface", "wall")))
    return bc1, bc2


def region_element_counts(partition: RegionPartition,
                          grids: Sequence[StructuredGrid]) -> Tuple[int, int, int, int]:
    """(N_S, N_B, N_F, N_total)."""
    grid1, grid2 = grids
    layer = grid2.nx * grid2.ny
    n_slow = partition.slow_layers * layer
    n_buffer = partition.buffer_layers * layer
    n_fast = grid1.n_elements
    return n_slow, n_buffer, n_fast, n_slow + n_buffer + n_fast
