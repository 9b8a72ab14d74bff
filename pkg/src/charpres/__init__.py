"""Exact invariants of hypersurface singularities in positive characteristic.

Sparse polynomials over Q or F_p, weighted Rees algebras with differential
saturation and the tau invariant, elimination-style presentations with slopes
and H-orders, monoidal transformation towers with exceptional-divisor
bookkeeping, and the attached monomial algebra with its combinatorial
resolution game.
"""

from .errors import (CharpresError, CommandError, DegenerateSlopeError,
                     NonMonomialElimError, NotMonicError, NotNormalFormError,
                     PermissibilityError, PolyParseError, SceneParseError,
                     TrackingError)
from .poly import (INF, ClosedPoint, FieldSpec, GenericPoint, MPoly,
                   WeightedForm, hasse_derivative, initial_form, order_at,
                   parse_poly, render_poly, weighted_initial_form)
from .rees import (Pair, ReesAlg, diff_saturate, ord_at, pair_to_rees,
                   sing_member, singular_coordinate_strata, tau_at,
                   tau_translation_oracle)
from .projection import (PPresentation, Presentation, SimplifiedPresentation,
                         coefficient_elim, hord, hord_data,
                         make_p_presentation, membership_criterion, normalize,
                         slope_poly, slope_presentation, upstairs_algebra)
from .blowup import (Center, Chart, Tower, blow_up_poly, stage_ab_experiment,
                     transform_object, transform_presentation)
from .monomial import (MonomialAlg, combinatorial_resolve, divides,
                       is_strong_monomial, lift_resolution, ord_monomial,
                       resolve_game, sandwich_report, track_monomial)
from .scene import (Scene, canonical_json, load_scene, parse_scene, run_scene,
                    verify_trace)

__version__ = "0.1.0"
