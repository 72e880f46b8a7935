"""Survivor subshifts, pressure, and dimension bounds for orbit-avoiding sets.

The toolkit builds survivor subshifts from forbidden-word families,
computes entropies, pressures and Bowen-equation dimension roots,
realizes affine horseshoes and linear toral automorphisms, and checks
the standard entropy/dimension lower bounds for exceptional (orbit-
avoiding) sets on those models.
"""

from .exceptional import (
    DEFAULT_TOLERANCES,
    DimensionReport,
    cover_target,
    exceptional_report,
    report_to_json,
    reports_to_csv,
    sweep_depth,
    toral_exceptional_report,
)
from .fractal import (
    CylinderCover,
    DimEstimate,
    PointCloud,
    birkhoff_sum,
    bowen_entropy_estimate,
    bowen_measure_class,
    box_dimension,
    load_pointcloud,
    marstrand_bound,
    moran_cover,
    save_pointcloud,
)
from .spectral import ConvergenceError, spectral_radius
from .symbolic import (
    EMPTY_ENTROPY,
    ForbiddenFamily,
    Sft,
    SurvivorSet,
    Word,
    avoids,
    build_survivor,
    dolgopyat_sum,
    edge_list,
    family_from_text,
    family_to_text,
    full_shift,
    legal_words,
    normalize_family,
    power_recode,
    refine_sft,
    sft_entropy,
    word_count,
)
from .systems import (
    AffineHorseshoe,
    ModelFormatError,
    Rect,
    TargetSet,
    ToralAutomorphism,
    code_point,
    dump_model,
    horseshoe_potentials,
    load_model,
    parse_model_text,
    point_from_itinerary,
    realize_cylinder,
    sample_invariant_set,
    toral_orbit,
    toral_survivors,
)
from .thermo import (
    HyperbolicSpectrum,
    LocallyConstantPotential,
    MarkovMeasure,
    bernoulli_measure,
    bowen_root,
    cylinder_probability,
    dynamical_dimension,
    lyapunov,
    markov_measure,
    measure_entropy,
    parry_measure,
    pressure,
    young_dimension,
)

__version__ = "0.1.0"
