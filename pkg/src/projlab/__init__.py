"""projlab: projection families under linear-fractional symmetries.

Evaluate projection bundles induced by Mobius, projective, and rotation
flows, predict and empirically locate the sets where the quantitative
derivative condition behind dimension-preservation results degenerates, and
run desk-scale dimension sweeps of self-similar test sets.
"""

from .algebra import (
    ExtendedComplex,
    HomPoint1,
    HomPoint2,
    INFINITY,
    INFINITY_X,
    INFINITY_Y,
    MobiusMap,
    ProjectiveMap,
    SingularPointError,
    ZeroGeneratorError,
    chordal_dist,
    exp_gl3,
    exp_sl2,
    expm,
    mobius_apply,
    pi_standard,
    proj_apply,
    rho_gram,
)
from .dimension import (
    BoxCountFit,
    IFSSystem,
    PointCloud,
    Similarity,
    box_count_dim,
    dim_sweep,
    ifs_generate,
    marstrand_report,
    similarity_dimension,
)
from .families import (
    KleinFamily,
    MobiusFull,
    MobiusOneParam,
    ProjectionFamily,
    ProjectiveFull,
    ProjectiveOneParam,
    RotationFamily,
    SphereFamily,
    conjugate_family,
    conjugate_generator,
    family_dt_numeric,
    family_from_json,
    grassmann_chart,
    klein_closest_point,
    mobius_dt_identity,
    mobius_family_eval,
    mobius_identity_partials,
    projective_dt_identity,
    projective_family_eval,
    sphere_closest_point,
)
from .transversality import (
    ClassificationVerdict,
    LocusDescription,
    Region,
    ScanReport,
    Triple,
    check_triple,
    classify_mobius,
    classify_projective,
    empirical_degeneracy_scan,
    estimate_constant,
    phi,
    predict_locus_mobius,
    predict_locus_projective,
    transport_locus,
)

__version__ = "0.1.0"
