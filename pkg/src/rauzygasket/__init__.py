"""Rauzy induction on special systems of isometries, the associated integer
cocycles and their certificates, thermodynamic pressure and the
maximal-entropy parameter, Lyapunov spectra, and direct tracing of chaotic
plane sections of the explicit triply periodic surface.
"""

from .core import (
    Cubic,
    DegenerateOrder,
    IntMatrix3,
    NonPositiveLength,
    NotUnimodular,
    SimplexPoint,
    SpecialSystem,
    char_poly,
    discriminant,
    isolate_real_roots,
    make_system,
    mat_inverse_unimodular,
    mat_mul,
    mat_transpose,
)
from .induction import (
    HOLE,
    Hole,
    HoleReached,
    NextStep,
    PathStep,
    PrecisionExhausted,
    Word,
    accelerated_step,
    cylinder,
    cylinder_barycenter,
    gasket_depth,
    hilbert_distance,
    markov_map,
    orbit_steps,
    rauzy_step,
    render_gasket,
    step_produces_hole,
    word,
)
from .cocycle import (
    B1_MATRIX,
    B2_MATRIX,
    a_block,
    b_block,
    fully_subtractive_step,
    is_galois_pinching,
    is_pisot,
    is_positive_path,
    is_twisting_pair,
    loop_word,
    path_cocycle,
)
from .thermo import (
    GibbsChain,
    ShiftState,
    TransferModel,
    build_transfer,
    gibbs_chain,
    pressure,
    roof,
    roof_mass,
    sample_word,
    solve_kappa0,
    zm_partition,
)
from .lyapunov import (
    NonHyperbolic,
    Overflow,
    Spectrum,
    diffusion_rate,
    direct_orbit_exponents,
    lyapunov_spectrum,
    periodic_stream,
)
from .surface import (
    BadParameters,
    DegenerateLevel,
    JunctionAnomaly,
    Segment,
    SurfaceModel,
    Trace,
    build_surface,
    diffusion_exponent,
    export_trace,
    section_segments,
    trace,
)

__version__ = "0.1.0"
