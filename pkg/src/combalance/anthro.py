"""Anthropometric indices: New BMI and adult body-fat percentage.

New BMI (Trefethen 2013) replaces the square of height with its 2.5 power::

    new_bmi = 1.3 * weight_kg / height_m ** 2.5

Adult body-fat percentage (Deurenberg-type regression)::

    bfp = 1.20 * bmi + 0.23 * age - 10.8 * sex - 5.4,   sex = 1 male, 0 female

The regression is statistical, so out-of-band results are flagged with an
:class:`ImplausibleBodyFatWarning` rather than rejected.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, ImplausibleBodyFatWarning

SEXES = ("male", "female")
BMI_VARIANTS = ("new_bmi", "classic_bmi")
PLAUSIBLE_BFP = (2.0, 60.0)
MAX_AGE = 150.0


def _check_positive(field, value):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise DomainError(field, value, "must be a real number")
    if not math.isfinite(value) or value <= 0:
        raise DomainError(field, value)


def _check_age(age_years):
    if not isinstance(age_years, (int, float)) or isinstance(age_years, bool):
        raise DomainError("age_years", age_years, "must be a real number")
    if not (0 <= age_years < MAX_AGE):
        raise DomainError("age_years", age_years, "must lie in [0, 150)")


def _check_sex(sex):
    if sex not in SEXES:
        raise DomainError("sex", sex, "must be 'male' or 'female'")


def new_bmi(weight_kg: float, height_m: float) -> float:
    """New BMI, ``1.3 * weight / height**2.5``."""
    _check_positive("weight_kg", weight_kg)
    _check_positive("height_m", height_m)
    return 1.3 * weight_kg / height_m ** 2.5


def classic_bmi(weight_kg: float, height_m: float) -> float:
    _check_positive("weight_kg", weight_kg)
    _check_positive("height_m", height_m)
    return weight_kg / height_m ** 2


def is_plausible_bfp(bfp: float) -> bool:
    lo, hi = PLAUSIBLE_BFP
    return lo <= bfp <= hi


def body_fat_percent(bmi: float, age_years: float, sex: str) -> float:
    """Adult body-fat percentage from BMI, age and sex.

    Emits :class:`ImplausibleBodyFatWarning` when the value falls outside
    ``[2, 60]`` percent; the value itself is always returned.
    """
    if not isinstance(bmi, (int, float)) or not math.isfinite(bmi):
        raise DomainError("bmi", bmi, "must be finite")
    _check_age(age_years)
    _check_sex(sex)
    sex_code = 1.0 if sex == "male" else 0.0
    bfp = math.fsum((1.20 * bmi, 0.23 * age_years, -10.8 * sex_code, -5.4))
    if not is_plausible_bfp(bfp):
        warnings.warn(
            f"body-fat estimate {bfp:.3f}% outside plausible range {PLAUSIBLE_BFP}",
            ImplausibleBodyFatWarning,
            stacklevel=2,
        )
    return bfp


@dataclass
class SubjectProfile:
    """Demographic record of one subject.

    ``bmi`` and ``bfp`` are derived values; :func:`profile_bfp` fills them in.
    ``bmi_variant`` records which BMI fed the body-fat formula so the cached
    values can be re-verified.
    """

    id: str
    weight_kg: float
    height_m: float
    age_years: float
    sex: str
    bmi: Optional[float] = None
    bfp: Optional[float] = None
    bmi_variant: str = "new_bmi"

    def __post_init__(self):
        _check_positive("weight_kg", self.weight_kg)
        _check_positive("height_m", self.height_m)
        _check_age(self.age_years)
        _check_sex(self.sex)
        if self.bmi_variant not in BMI_VARIANTS:
            raise DomainError("bmi_variant", self.bmi_variant, f"must be one of {BMI_VARIANTS}")
        self.weight_kg = float(self.weight_kg)
        self.height_m = float(self.height_m)
        self.age_years = float(self.age_years)

    @property
    def bfp_plausible(self) -> Optional[bool]:
        return None if self.bfp is None else is_plausible_bfp(self.bfp)

    def check_cached(self, rtol=1e-12):
        """Raise DomainError if cached bmi/bfp disagree with recomputation."""
        bmi = _bmi(self, self.bmi_variant)
        if self.bmi is not None and not _close(self.bmi, bmi, rtol):
            raise DomainError("bmi", self.bmi, f"does not match recomputed {bmi!r}")
        if self.bfp is not None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ImplausibleBodyFatWarning)
                bfp = body_fat_percent(bmi, self.age_years, self.sex)
            if not _close(self.bfp, bfp, rtol):
                raise DomainError("bfp", self.bfp, f"does not match recomputed {bfp!r}")

    def to_dict(self):
        d = {
            "id": self.id,
            "weight_kg": self.weight_kg,
            "height_m": self.height_m,
            "age_years": self.age_years,
            "sex": self.sex,
            "bmi_variant": self.bmi_variant,
        }
        if self.bmi is not None:
            d["bmi"] = self.bmi
        if self.bfp is not None:
            d["bfp"] = self.bfp
        return d

    @classmethod
    def from_dict(cls, d):
        known = {"id", "weight_kg", "height_m", "age_years", "sex", "bmi", "bfp", "bmi_variant"}
        extra = set(d) - known
        if extra:
            raise DomainError("profile", sorted(extra), "contains unknown fields")
        missing = {"id", "weight_kg", "height_m", "age_years", "sex"} - set(d)
        if missing:
            raise DomainError("profile", sorted(missing), "is missing required fields")
        profile = cls(**d)
        profile.check_cached()
        return profile


def _close(a, b, rtol):
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


def _bmi(profile, variant):
    if variant == "new_bmi":
        return new_bmi(profile.weight_kg, profile.height_m)
    if variant == "classic_bmi":
        return classic_bmi(profile.weight_kg, profile.height_m)
    raise DomainError("bmi_variant", variant, f"must be one of {BMI_VARIANTS}")


def profile_bfp(profile: SubjectProfile, bmi_variant: str = "new_bmi") -> float:
    """Body-fat percentage of ``profile``; caches bmi and bfp on it."""
    bmi = _bmi(profile, bmi_variant)
    bfp = body_fat_percent(bmi, profile.age_years, profile.sex)
    profile.bmi_variant = bmi_variant
    profile.bmi = bmi
    profile.bfp = bfp
    return bfp


def profile_for_bfp(target_bfp, height_m, age_years, sex, id="subject", bmi_variant="new_bmi"):
    """Build a profile whose derived body fat equals ``target_bfp``.

    Inverts both formulas for the weight; the cached values are then
    recomputed forward so the profile invariants hold.
    """
    sex_code = 1.0 if sex == "male" else 0.0
    bmi = (target_bfp - 0.23 * age_years + 10.8 * sex_code + 5.4) / 1.20
    if bmi <= 0:
        raise DomainError("target_bfp", target_bfp, "requires a non-positive BMI for these demographics")
    if bmi_variant == "new_bmi":
        weight = bmi * height_m ** 2.5 / 1.3
    else:
        weight = bmi * height_m ** 2
    profile = SubjectProfile(id=id, weight_kg=weight, height_m=height_m, age_years=age_years, sex=sex)
    profile_bfp(profile, bmi_variant)
    return profile
