"""
core/models.py
==============
Shared data contracts for the Dirac boundary-integral transmission solver.

Every module in this project communicates through these dataclasses.
Numerical packages (specfun, quadrature, operators, solver, fields) take
and return instances defined here, so a mesh built by geometry/ can be
handed to any assembler, and a solved density can be handed to any
post-processor without importing the module that produced it.

Conventions used throughout:
  - Points and 2-vectors are stored as complex numbers x + iy.
  - Densities are 4N complex vectors, component-major:
    h = [h1(all nodes), h2(all nodes), h3(all nodes), h4(all nodes)]
    in the frame {1, ντ, ν, τ}.
  - ν is the unit normal pointing into the exterior domain Ω⁻ and
    τ = *ν is the counter-clockwise tangent.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np


# ---------------------------------------------------------------------------
# Clifford algebra
# ---------------------------------------------------------------------------

@dataclass
class Multivector:
    """
    Element of the exterior algebra ∧R^n, n = 2 or 3.

    Coefficients are stored dense over all 2^n index subsets. The subset
    s ⊆ {1..n} is encoded as the bitmask with bit (i-1) set for every i in s,
    so coeffs[0] is the scalar part and coeffs[0b11] is the e12 part.

    Attributes:
        dim (int): Dimension n of the underlying vector space (2 or 3).
        coeffs (np.ndarray): Complex array of length 2^dim.
    """
    dim: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"Multivector dimension must be 2 or 3, got {self.dim}")
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (1 << self.dim,):
            raise ValueError(
                f"Multivector of dim {self.dim} needs {1 << self.dim} coefficients, "
                f"got shape {self.coeffs.shape}"
            )

    def __add__(self, other: "Multivector") -> "Multivector":
        _check_same_dim(self, other)
        return Multivector(self.dim, self.coeffs + other.coeffs)

    def __sub__(self, other: "Multivector") -> "Multivector":
        _check_same_dim(self, other)
        return Multivector(self.dim, self.coeffs - other.coeffs)

    def __neg__(self) -> "Multivector":
        return Multivector(self.dim, -self.coeffs)

    def __mul__(self, scalar: complex) -> "Multivector":
        return Multivector(self.dim, self.coeffs * scalar)

    __rmul__ = __mul__

    @property
    def scalar(self) -> complex:
        """Grade-0 coefficient."""
        return complex(self.coeffs[0])

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector."""
        return float(np.linalg.norm(self.coeffs))


def _check_same_dim(u: Multivector, w: Multivector) -> None:
    if u.dim != w.dim:
        raise ValueError(f"Dimension mismatch: {u.dim} vs {w.dim}")


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Kernel:
    """
    Helmholtz fundamental solution data for one complex wavenumber.

    Built by specfun.kernels.make_kernel(), which validates k and fills the
    cached constants used by the logarithmic kernel splits.

    All series are in w = (k r / 2)².

    Attributes:
        k (complex): Wavenumber, k ≠ 0 and Im k ≥ 0.
        log_half_k (complex): Principal log(k/2).
        phi_log_coeffs (np.ndarray): A(r) in Φ_k = A log r + B.
        phi_smooth_coeffs (np.ndarray): B(r) in Φ_k = A log r + B.
        grad_log_coeffs (np.ndarray): L(r) in G_k = -1/(πr²) + L log r + C.
        grad_smooth_coeffs (np.ndarray): C(r) in the same split.
    """
    k: complex
    log_half_k: complex
    phi_log_coeffs: np.ndarray
    phi_smooth_coeffs: np.ndarray
    grad_log_coeffs: np.ndarray
    grad_smooth_coeffs: np.ndarray

    def series_argument(self, r: np.ndarray) -> np.ndarray:
        """w = (k r / 2)²."""
        return (0.5 * self.k * r) ** 2


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

@dataclass
class Curve:
    """
    Closed parametrized curve z(t), t ∈ [0, 1), oriented counter-clockwise.

    Attributes:
        name (str): Shape name ("circle", "starfish", "teardrop").
        position (Callable): t -> complex positions z(t), vectorized.
        derivative (Callable): t -> complex z'(t), vectorized.
        corners (List[float]): Parameters of corner points (empty if smooth).
        parameters (dict): Shape parameters, echoed into provenance headers.
    """
    name: str
    position: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    corners: List[float] = field(default_factory=list)
    parameters: dict = field(default_factory=dict)

    @property
    def has_corners(self) -> bool:
        return len(self.corners) > 0


@dataclass(eq=False)
class Mesh:
    """
    Composite 16-point Gauss–Legendre discretization of a Curve.

    eq=False keeps the default identity hash, so meshes can key the
    per-mesh quadrature caches.

    Attributes:
        curve (Curve): The discretized curve.
        breakpoints (np.ndarray): Panel parameter endpoints, length n_panels + 1.
        t (np.ndarray): Node parameters, length N.
        z (np.ndarray): Node positions (complex).
        dz (np.ndarray): z'(t) at the nodes (complex).
        speed (np.ndarray): |z'(t)|.
        nu (np.ndarray): Outward unit normal at the nodes (complex).
        tau (np.ndarray): Counter-clockwise unit tangent, tau = i * nu.
        weights (np.ndarray): Arclength quadrature weights.
        panel_index (np.ndarray): Panel number of every node.
        grading (str): "none" or "dyadic(n)".
        n_refine (int): Dyadic refinement levels applied per corner side.
    """
    curve: Curve
    breakpoints: np.ndarray
    t: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    speed: np.ndarray
    nu: np.ndarray
    tau: np.ndarray
    weights: np.ndarray
    panel_index: np.ndarray
    grading: str = "none"
    n_refine: int = 0

    @property
    def n_nodes(self) -> int:
        return len(self.z)

    @property
    def n_panels(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def panel_lengths(self) -> np.ndarray:
        """Arclength of each panel (sum of its node weights)."""
        return np.bincount(self.panel_index, weights=self.weights,
                           minlength=self.n_panels)

    @property
    def panel_endpoints(self) -> Tuple[np.ndarray, np.ndarray]:
        """Complex start and end points of every panel."""
        ends = self.curve.position(np.mod(self.breakpoints, 1.0))
        return ends[:-1], ends[1:]

    def panel_nodes(self, p: int) -> np.ndarray:
        """Node indices of panel p."""
        return np.arange(16 * p, 16 * (p + 1))


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PanelRule:
    """
    Canonical 16-point rule on [-1, 1] with product-integration corrections.

    Rows of the correction matrices are targets, columns are panel nodes.
    "adjacent" matrices hold the weights for targets at the nodes of the
    neighbouring panel [1, 3] (the left neighbour follows by symmetry).

    Attributes:
        nodes (np.ndarray): 16 Gauss–Legendre nodes, ascending.
        weights (np.ndarray): 16 Gauss–Legendre weights.
        log_self (np.ndarray): ∫ log|t - t_i| p(t) dt weights, 16x16.
        cauchy_self (np.ndarray): p.v. ∫ p(t)/(t - t_i) dt weights, 16x16.
        log_adjacent (np.ndarray): log weights for targets t_i + 2.
        cauchy_adjacent (np.ndarray): Cauchy weights for targets t_i + 2.
    """
    nodes: np.ndarray
    weights: np.ndarray
    log_self: np.ndarray
    cauchy_self: np.ndarray
    log_adjacent: np.ndarray
    cauchy_adjacent: np.ndarray


@dataclass(eq=False)
class UpsampledPanels:
    """
    Every panel of a Mesh split into equal sub-panels of 16 nodes each.

    Near-zone product integration runs on these nodes; densities reach them
    through the interpolation matrix from the 16 panel nodes.

    Attributes:
        t (np.ndarray): Fine node parameters, shape (n_panels, F).
        z (np.ndarray): Fine node positions, shape (n_panels, F).
        dz (np.ndarray): z'(t) at the fine nodes.
        tau (np.ndarray): Unit tangent at the fine nodes.
        weights (np.ndarray): Arclength weights of the fine nodes.
        centers (np.ndarray): Chord midpoint of every sub-panel, (n_panels, S).
        half_chords (np.ndarray): Half-chord of every sub-panel, (n_panels, S).
        interpolation (np.ndarray): Panel nodes to fine nodes, shape (F, 16).
    """
    t: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    tau: np.ndarray
    weights: np.ndarray
    centers: np.ndarray
    half_chords: np.ndarray
    interpolation: np.ndarray

    @property
    def nu(self) -> np.ndarray:
        return -1j * self.tau


@dataclass(eq=False)
class LayerInteractions:
    """
    Target/source pair geometry with near-zone product-integration weights.

    Sources are the mesh nodes; targets are either the nodes themselves
    (boundary operators) or off-curve points (field evaluation). Every
    (target, panel) pair in the near zone is a link; its weights live on
    the upsampled nodes of that panel.

    Attributes:
        targets (np.ndarray): Complex target points, length m.
        rho (np.ndarray): y - x for every pair, shape (m, N).
        r (np.ndarray): |y - x|, shape (m, N).
        near_targets (np.ndarray): Target index of every link.
        near_panels (np.ndarray): Panel index of every link.
        fine_rho (np.ndarray): y - x on the upsampled nodes, shape (links, F).
        fine_r (np.ndarray): |fine_rho|.
        cauchy (np.ndarray): Complex weights of ∫ f(ζ)/(ζ - z) dζ, shape (links, F).
        log (np.ndarray): Real weights of ∫ f log|ζ - z| dσ, shape (links, F).
        upsampled (UpsampledPanels): Fine nodes of the mesh.
        symmetric (bool): True for node-to-node interactions.
    """
    targets: np.ndarray
    rho: np.ndarray
    r: np.ndarray
    near_targets: np.ndarray
    near_panels: np.ndarray
    fine_rho: np.ndarray
    fine_r: np.ndarray
    cauchy: np.ndarray
    log: np.ndarray
    upsampled: UpsampledPanels
    symmetric: bool = False

    @property
    def n_links(self) -> int:
        return len(self.near_targets)


@dataclass(eq=False)
class KernelTable:
    """
    Kernel values of one wavenumber on a LayerInteractions.

    Full tables are zero at coincident pairs; the split values cover the
    upsampled nodes of every link, shape (links, F).

    Attributes:
        k (complex): Wavenumber.
        phi (np.ndarray): Φ_k(y - x), shape (m, N).
        grad (np.ndarray): G_k(|y - x|) with ∇Φ_k = G_k ρ, shape (m, N).
        log_phi, smooth_phi (np.ndarray): A and B on the links.
        log_grad, smooth_grad (np.ndarray): L and C on the links.
    """
    k: complex
    phi: np.ndarray
    grad: np.ndarray
    log_phi: np.ndarray
    smooth_phi: np.ndarray
    log_grad: np.ndarray
    smooth_grad: np.ndarray


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

@dataclass
class DiracParams2D:
    """
    Constant diagonal matrices of the 2D Dirac integral equation.

    Attributes:
        k_hat (complex): Wavenumber ratio k₊/k₋.
        eps_hat (complex): Permittivity ratio.
        P, P_prime, N, N_prime (np.ndarray): Diagonals, length 4.
        M (np.ndarray): diag[k̂, |k̂|, ε̂, 1].
        kM_prime (np.ndarray): k̂M′ = diag[|k̂|, k̂, 1, k̂/|k̂|].
        k_minus (complex | None): Exterior wavenumber, when known.
    """
    k_hat: complex
    eps_hat: complex
    P: np.ndarray
    P_prime: np.ndarray
    N: np.ndarray
    N_prime: np.ndarray
    M: np.ndarray
    kM_prime: np.ndarray
    k_minus: Optional[complex] = None

    def identity_residual(self) -> float:
        """Max entry-wise deviation of P(k̂M′ + M)P′ from the identity."""
        return float(np.max(np.abs(self.P * (self.kM_prime + self.M) * self.P_prime - 1.0)))


@dataclass
class DiracParams3D:
    """
    The eight-entry diagonals of the 3D Dirac equation (no 3D assembly).

    Attributes:
        k_hat, eps_hat (complex): Wavenumber and permittivity ratios.
        P, P_prime, N, N_prime (np.ndarray): Diagonals, length 8.
        M (np.ndarray): M = P⁻¹N.
        kinv_M_prime (np.ndarray): k̂⁻¹M′ = N′P′⁻¹.
    """
    k_hat: complex
    eps_hat: complex
    P: np.ndarray
    P_prime: np.ndarray
    N: np.ndarray
    N_prime: np.ndarray
    M: np.ndarray
    kinv_M_prime: np.ndarray

    def identity_residual(self) -> float:
        """Max entry-wise deviation of P(k̂⁻¹M′ + M)P′ from the identity."""
        return float(np.max(np.abs(self.P * (self.kinv_M_prime + self.M) * self.P_prime - 1.0)))


@dataclass(eq=False)
class DiracSystem:
    """
    Assembled Dirac system I + P E_{k+} N′ − N E_{k−} P′.

    Attributes:
        mesh (Mesh): Discretization the system lives on.
        k_minus (complex): Exterior wavenumber.
        params (DiracParams2D): Diagonal parameter matrices.
        matrix (np.ndarray): 4N x 4N complex system matrix.
        metadata (dict): Assembly details (sizes, timings, block signs).
        blocks_plus, blocks_minus (dict | None): E_{k±} blocks, kept on request.
    """
    mesh: Mesh
    k_minus: complex
    params: DiracParams2D
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)
    blocks_plus: Optional[dict] = field(default=None, repr=False)
    blocks_minus: Optional[dict] = field(default=None, repr=False)

    @property
    def k_hat(self) -> complex:
        return self.params.k_hat

    @property
    def eps_hat(self) -> complex:
        return self.params.eps_hat

    @property
    def k_plus(self) -> complex:
        return self.params.k_hat * self.k_minus

    @property
    def n_unknowns(self) -> int:
        return self.matrix.shape[0]


@dataclass(eq=False)
class MullerSystem:
    """
    Classical two-density transmission system in the interior traces
    φ = u⁺ and ψ = ∂_ν u⁺.

    Attributes:
        mesh (Mesh): Discretization.
        k_minus (complex): Exterior wavenumber.
        k_hat (complex): Wavenumber ratio.
        eps_hat (complex): Permittivity ratio.
        matrix (np.ndarray): 2N x 2N complex system matrix.
        metadata (dict): Assembly details.
    """
    mesh: Mesh
    k_minus: complex
    k_hat: complex
    eps_hat: complex
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def k_plus(self) -> complex:
        return self.k_hat * self.k_minus


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------

@dataclass
class SweepRecord:
    """
    One sample of a wavenumber sweep.

    Attributes:
        k_minus (complex): Exterior wavenumber of the sample.
        cond_2 (float): 2-norm condition number.
        sigma_min (float): Smallest singular value (or its estimate).
        gmres_iters (int | None): GMRES iterations, when requested.
        flag (bool): Resonance suspect.
        method (str): "svd" or "estimate".
        refined (bool): Sample moved by peak refinement.
    """
    k_minus: complex
    cond_2: float
    sigma_min: float
    gmres_iters: Optional[int] = None
    flag: bool = False
    method: str = "svd"
    refined: bool = False


@dataclass
class SweepResult:
    """
    Output of solver.sweep.sweep().

    Attributes:
        case (str): Material case name.
        k_hat (complex): Wavenumber ratio of the sweep.
        eps_hat (complex): Permittivity ratio of the sweep.
        records (List[SweepRecord]): Samples ordered by sweep variable.
        mesh_summary (dict): Mesh description for provenance.
    """
    case: str
    k_hat: complex
    eps_hat: complex
    records: List[SweepRecord] = field(default_factory=list)
    mesh_summary: dict = field(default_factory=dict)

    @property
    def n_flags(self) -> int:
        return sum(1 for r in self.records if r.flag)

    @property
    def flagged(self) -> List[SweepRecord]:
        return [r for r in self.records if r.flag]


@dataclass
class HomotopyResult:
    """
    Solutions along ε̂_j = ε̂_target + iδ_j, δ_j ↓ 0.

    Attributes:
        solution (np.ndarray): Extrapolated limit density.
        deltas (List[float]): δ values of the path.
        probe_values (List[np.ndarray]): Probe values per path step.
        differences (List[float]): Max-norm differences of successive probes.
        limit_probe (np.ndarray): Extrapolated probe values at δ = 0.
        iterations (List[int]): GMRES iterations per step (0 for direct).
        converged (bool): Path differences contract toward a limit.
        last_solution (np.ndarray): Density at the smallest δ.
    """
    solution: np.ndarray
    deltas: List[float]
    probe_values: List[np.ndarray]
    differences: List[float]
    limit_probe: np.ndarray
    iterations: List[int]
    converged: bool
    last_solution: np.ndarray


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------

REGION_INTERIOR = 1
REGION_EXTERIOR = -1
REGION_BOUNDARY = 0


@dataclass
class GridSpec:
    """
    Rectangular Cartesian lattice request.

    Attributes:
        bbox (Tuple[float, float, float, float]): (xmin, xmax, ymin, ymax).
        nx (int): Points along x.
        ny (int): Points along y.
        gradient (bool): Also evaluate ∇U.
    """
    bbox: Tuple[float, float, float, float]
    nx: int
    ny: int
    gradient: bool = False


@dataclass
class FieldGrid:
    """
    Field values on a lattice, row-major with shape (ny, nx).

    Attributes:
        bbox: (xmin, xmax, ymin, ymax).
        nx, ny (int): Lattice dimensions.
        x, y (np.ndarray): Lattice coordinates, lengths nx and ny.
        region (np.ndarray): +1 interior, -1 exterior, 0 on ∂Ω.
        collar (np.ndarray): Within one panel length of ∂Ω.
        U (np.ndarray): U⁺ inside, scattered U⁻ outside, NaN on ∂Ω.
        gradU (np.ndarray | None): Shape (ny, nx, 2), complex.
        k_minus, k_plus, eps_hat (complex): Scene parameters.
    """
    bbox: Tuple[float, float, float, float]
    nx: int
    ny: int
    x: np.ndarray
    y: np.ndarray
    region: np.ndarray
    collar: np.ndarray
    U: np.ndarray
    gradU: Optional[np.ndarray]
    k_minus: complex
    k_plus: complex
    eps_hat: complex


@dataclass
class CornerFit:
    """
    Power-law fit h(t) ∝ t^η near a corner.

    Attributes:
        eta (complex): Fitted exponent.
        residual (float): RMS residual of the log-modulus and phase fits.
        side (str): "right" (t → 0⁺) or "left" (t → 1⁻) of the corner.
        n_points (int): Nodes used.
        window (Tuple[int, int]): Panel window counted from the corner.
        accepted (bool): Residual below the power-law threshold.
    """
    eta: complex
    residual: float
    side: str
    n_points: int
    window: Tuple[int, int]
    accepted: bool


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MaterialCase:
    """
    Named material case of the numerical experiments.

    Attributes:
        name (str): Registry key.
        k_hat (complex): k₊/k₋.
        eps_hat (complex): Permittivity ratio.
        sweep_variable (str): "k_minus" or "k_plus" (real sweep variable).
        description (str): One-line description.
    """
    name: str
    k_hat: complex
    eps_hat: complex
    sweep_variable: str = "k_minus"
    description: str = ""


@dataclass
class ExperimentConfig:
    """
    Resolved experiment configuration (file + command-line overrides).

    Attributes mirror the key=value config keys; see core/config.py.
    """
    shape: str = "circle"
    radius: float = 1.0
    arms: int = 5
    amplitude: float = 0.3
    opening_angle: float = float(np.pi / 2)
    panels: int = 32
    refine: int = 0
    case: Optional[str] = "positive"
    k_minus: complex = 5.0
    k_hat: Optional[complex] = None
    eps_hat: Optional[complex] = None
    direction: float = float(np.pi / 4)
    solver: str = "direct"
    gmres_tol: float = float(np.finfo(float).eps)
    gmres_maxiter: Optional[int] = None
    homotopy: Optional[bool] = None
    homotopy_delta0: float = 0.1
    homotopy_ratio: float = 0.1
    homotopy_steps: int = 6
    kmin: float = 0.0
    kmax: float = 20.0
    samples: int = 400
    refine_peaks: bool = False
    grid_nx: int = 100
    grid_ny: int = 100
    grid_margin: float = 0.5
    gradient: bool = False
    muller: bool = False
    output_dir: str = "output"
    workers: int = 1
    seed: int = 0


@dataclass
class CheckResult:
    """
    Outcome of one self-test check.

    Attributes:
        name (str): Check identifier.
        passed (bool): Measured value within tolerance.
        measured (float): Measured deviation.
        tolerance (float): Acceptance threshold.
        detail (str): Human-readable context.
    """
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""
