"""Model parameters and derived stability/energy constants.

All quantities are nondimensional.  The stent coating occupies (-l, 0) and
the tissue (media) occupies (0, 1).  ``time_unit`` (seconds of wall-clock
time per unit of nondimensional t) is deliberately not part of the model:
it only affects output labeling and lives in the run configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError, ValidationError

# Default nondimensional parameter set for a drug-eluting stent against
# arterial media (porosity phi, partition coefficient K, coating
# diffusivity delta, coating thickness l, interface permeability P,
# Peclet and Damkohler numbers).
PAPER_DEFAULTS: dict[str, float] = {
    "phi": 0.61,
    "k_part": 15.0,
    "delta": 4.0e-7,
    "l": 0.028,
    "p_tilde": 4.5e4,
    "pe": 0.1044,
    "da": 0.0162,
}

_PARAM_NAMES = ("delta", "p_tilde", "pe", "da", "k_part", "phi", "l")


@dataclass(frozen=True)
class ModelParams:
    """The seven nondimensional constants of the release model.

    delta    -- stent-coating diffusivity
    p_tilde  -- interface permeability (Kedem-Katchalsky coefficient)
    pe       -- Peclet number of the transmural advection
    da       -- Damkohler number of the cell-uptake reaction
    k_part   -- partition coefficient (uptake equilibrium c2/c1)
    phi      -- media porosity, strictly inside (0, 1)
    l        -- coating thickness, so the stent domain is (-l, 0)
    """

    delta: float
    p_tilde: float
    pe: float
    da: float
    k_part: float
    phi: float
    l: float

    def __post_init__(self):
        for name in ("delta", "p_tilde", "pe", "da", "k_part", "l"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ParameterError(f"{name} must be positive, got {value}")
        if not 0.0 < self.phi < 1.0:
            raise ParameterError(
                f"phi must lie strictly between 0 and 1, got {self.phi}"
            )


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from a parameter set and the two mesh widths.

    gamma    -- energy weight, min(phi, 1-phi)/2; at most 1/4
    big_m    -- Gronwall growth rate (1+da)/(2*gamma) of the energy bound
    dt_max_s -- stated explicit step bound for the stent, h_s^2/(2*delta)
    dt_max_m -- stated explicit step bound for the media, phi*h_m^2/2
    """

    gamma: float
    big_m: float
    dt_max_s: float
    dt_max_m: float

    def __post_init__(self):
        if not 0.0 < self.gamma <= 0.25:
            raise ValidationError(f"gamma out of range: {self.gamma}")
        if not (self.big_m > 0 and self.dt_max_s > 0 and self.dt_max_m > 0):
            raise ValidationError("derived constants must be positive")


def validate_params(raw: dict, use_paper_defaults: bool = False) -> ModelParams:
    """Build a validated ModelParams from a name->value mapping.

    Every one of the seven parameters must be present unless
    ``use_paper_defaults`` is set, in which case missing names fall back to
    the shipped default set.  Unknown names are rejected.
    """
    unknown = sorted(set(raw) - set(_PARAM_NAMES))
    if unknown:
        raise ParameterError(f"unknown parameter name(s): {', '.join(unknown)}")
    values = {}
    for name in _PARAM_NAMES:
        if name in raw:
            try:
                values[name] = float(raw[name])
            except (TypeError, ValueError):
                raise ParameterError(
                    f"{name} must be a number, got {raw[name]!r}"
                ) from None
        elif use_paper_defaults:
            values[name] = PAPER_DEFAULTS[name]
        else:
            raise ParameterError(f"{name}: missing required parameter")
    return ModelParams(**values)


def paper_params() -> ModelParams:
    """The shipped default parameter set as a ModelParams."""
    return validate_params({}, use_paper_defaults=True)


def derived_constants(p: ModelParams, h_s: float, h_m: float) -> DerivedConstants:
    """Energy constants plus per-subdomain explicit step bounds.

    The step bounds interpret the stability condition per subdomain: the
    diffusive bound h_s^2/(2*delta) for the stent operator and
    phi*h_m^2/2 for the media operator, each in nondimensional time.
    """
    if not h_s > 0.0:
        raise ValidationError(f"h_s must be positive, got {h_s}")
    if not h_m > 0.0:
        raise ValidationError(f"h_m must be positive, got {h_m}")
    gamma = 0.5 * min(p.phi, 1.0 - p.phi)
    return DerivedConstants(
        gamma=gamma,
        big_m=(1.0 + p.da) / (2.0 * gamma),
        dt_max_s=h_s * h_s / (2.0 * p.delta),
        dt_max_m=p.phi * h_m * h_m / 2.0,
    )
