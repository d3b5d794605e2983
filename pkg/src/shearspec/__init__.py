"""shearspec: spectra of Dirichlet Laplacians on broken sheared waveguides.

The working objects are a geometry spec (shear slope + cross-section),
a discretization spec (grids, box length, boundary mode), and the
report types produced by the ladder runs.  The usual entry points:

    spec = WaveguideSpec(1.0, Rect(0, 1, 0, 1))
    disc = DiscretizationSpec(nx=48, n1=8, n2=16, L=6.0, mode="reduced2d")
    report = compute_spectrum(spec, disc)

Lower-level pieces (assembled forms, the block eigensolver, section
modes, the analytic certificates) live in their own modules and are
imported here unchanged.
"""

from .cross_section import (
    l_shaped_mask,
    numeric_modes,
    rectangle_modes,
    refine_mask,
    section_constants,
)
from .certificates import (
    bform_count,
    existence_certificate,
    prism_eigen_check,
)
from .geometry import (
    MaskSection,
    Rect,
    ShearParam,
    WaveguideSpec,
    map_point,
    metric,
    prism_region,
)
from .thresholds import (
    beta_star,
    bound_factor,
    ess_threshold,
    threshold_report,
    uniqueness_condition,
)
from .waveguide import (
    CountCertificate,
    DiscretizationSpec,
    SpectrumReport,
    SweepResult,
    benchmark_disc,
    compute_spectrum,
    count_discrete,
    separation_check,
    sweep_beta,
    symmetry_check,
)

__version__ = "0.1.0"

__all__ = [
    "ShearParam",
    "Rect",
    "MaskSection",
    "WaveguideSpec",
    "DiscretizationSpec",
    "SpectrumReport",
    "CountCertificate",
    "SweepResult",
    "metric",
    "map_point",
    "prism_region",
    "ess_threshold",
    "beta_star",
    "bound_factor",
    "uniqueness_condition",
    "threshold_report",
    "rectangle_modes",
    "numeric_modes",
    "section_constants",
    "refine_mask",
    "l_shaped_mask",
    "existence_certificate",
    "bform_count",
    "prism_eigen_check",
    "compute_spectrum",
    "count_discrete",
    "symmetry_check",
    "separation_check",
    "sweep_beta",
    "benchmark_disc",
    "__version__",
]
