from enum import Enum


class DerivativeScheme(Enum):
    CENTRAL = "central-difference"
    DUAL = "dual-number"

    @classmethod
    def from_input(cls, text):
        """Convert various input formats to a DerivativeScheme"""
        text = text.lower().strip().replace("_", "-")
        mapping = {
            "central": cls.CENTRAL,
            "central-difference": cls.CENTRAL,
            "fd": cls.CENTRAL,
            "dual": cls.DUAL,
            "dual-number": cls.DUAL,
            "ad": cls.DUAL,
        }
        if text not in mapping:
            raise ValueError(f"Invalid derivative scheme: {text}")
        return mapping[text]


class ConformalKind(Enum):
    RECIPROCAL_R = "reciprocal-r"
    RECIPROCAL_R2 = "reciprocal-r2"
    GAUSSIAN = "gaussian"
    RATIONAL = "rational"
    RADIAL_CUSTOM = "radial-custom"
    GENERAL = "general"

    @property
    def radial(self):
        return self is not ConformalKind.GENERAL


class MassSource(Enum):
    GENERIC = "generic"
    TEMPORAL_GAUGE = "temporal-gauge-closed-form"
    CATALOG = "catalog-closed-form"


class RegionTag(Enum):
    EXTERIOR = "Exterior"
    INTERIOR = "Interior"
    HORIZON_ACTUAL = "HorizonActual"
    HORIZON_APPARENT = "HorizonApparent"

    @property
    def is_horizon(self):
        return self in (RegionTag.HORIZON_ACTUAL, RegionTag.HORIZON_APPARENT)


class Verdict(Enum):
    NAKED = "Naked"
    NOT_NAKED = "NotNaked"


class CatalogId(Enum):
    SCHWARZSCHILD = "Schwarzschild"
    RN_SUPER = "RNSuper"
    RN_SUB = "RNSub"
    RN_EXTREMAL = "RNExtremal"
    ROBERTS = "Roberts"
    KERR = "Kerr"
    SYNTHETIC_COLLAPSE = "SyntheticCollapse"

    @classmethod
    def from_input(cls, text):
        """Convert CLI metric names to a CatalogId family name"""
        text = text.lower().strip().replace("_", "-")
        mapping = {
            "schwarzschild": "schwarzschild",
            "sch": "schwarzschild",
            "rn": "rn",
            "reissner-nordstrom": "rn",
            "rnsuper": "rn",
            "rnsub": "rn",
            "rnextremal": "rn",
            "roberts": "roberts",
            "kerr": "kerr",
            "synthetic": "synthetic",
            "synthetic-collapse": "synthetic",
            "syntheticcollapse": "synthetic",
        }
        if text not in mapping:
            raise ValueError(f"Invalid metric: {text}")
        return mapping[text]


class Stage(Enum):
    MASS = "mass"
    HORIZON = "horizon"
    NAKED = "naked"
    CONDITIONS = "conditions"
    STAY = "stay"
    PENROSE = "penrose"

    @classmethod
    def from_input(cls, text):
        """Parse a comma separated stage list, keeping pipeline order"""
        names = [part.strip().lower() for part in text.split(",") if part.strip()]
        if not names:
            raise ValueError("Invalid stages: empty list")
        stages = set()
        for name in names:
            if name == "all":
                stages.update(cls)
                continue
            try:
                stages.add(cls(name))
            except ValueError:
                raise ValueError(f"Invalid stage: {name}")
        return tuple(stage for stage in cls if stage in stages)


class VerifySuite(Enum):
    REMARK33 = "remark33"
    HORIZONS = "horizons"
    VERDICTS = "verdicts"
    PENROSE = "penrose"
    GRADIENTS = "gradients"
    ALL = "all"

    @classmethod
    def from_input(cls, text):
        """Convert a suite name to a VerifySuite"""
        text = text.lower().strip()
        for suite in cls:
            if suite.value == text:
                return suite
        raise ValueError(f"Invalid verify suite: {text}")
