"""Numerical toolkit for dimension estimates of hyperbolic invariant sets
and repellers via thermodynamic formalism."""

from .bowen import (BowenBracket, DimensionReport, FormulaDimension,
                    bowen_root, dimension_via_formula, full_report,
                    sandwich_sequence)
from .boxdim import (BoxCountTable, box_dimension, default_scale_ladder,
                     oracle_box_dimension, sample_leaf_set)
from .cocycle import (CocycleValue, LyapunovEstimate, PotentialSequence,
                      cocycle_value, conformality_defect,
                      four_c_inequality_check, kingman_check,
                      lyapunov_exponents, potential_sequence)
from .coding import (BoxRegion, CylinderRatio, Interval, MarkovCoding,
                     cylinder, enumerate_words, quasi_conformal_ratio)
from .errors import NumericalError, ParameterError
from .pressure import (EquilibriumData, PressureEstimate, SeparatedSet,
                       birkhoff_sum, marginal_weights, max_separated_set,
                       power_pressure_comparisons, pressure_separated,
                       pressure_sequence, pressure_transfer, transfer_entropy,
                       variational_crosscheck)
from .systems import (CATALOG, BundleFrame, CatalogRecord, SmoothSystem,
                      catalog_system, power_system)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
