"""Run configuration: all hyperparameters, ablation variant and feature flags.

The on-disk format is flat ``key = value`` text; every key is optional and
lists are comma separated (``inf`` marks a never-updated detector filter).
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .features import FeatureConfig, colornames_available, resolve_colornames_path
from .filter_learning import AdmmConfig
from .uncertainty import UncertaintyConfig

log = logging.getLogger(__name__)

# (detector filter indices, detector scales) per ablation variant.
# None means "all configured"; "st" is the slot aliasing the short-term model,
# 0 the never-updated initial filter; "short-term" disables the detector.
VARIANTS = {
    "full": (None, None),
    "st-multiscale": ("st", None),
    "st-single-scale": ("st", (1.0,)),
    "init-multiscale": ((0,), None),
    "init-single-scale": ((0,), (1.0,)),
    "short-term": ((), ()),
}


@dataclass
class RunConfig:
    variant: str = "full"
    # model learning
    eta: float = 0.02
    lam: float = 0.01
    admm_iterations: int = 4
    mu_init: float = 5.0
    mu_scale: float = 3.0
    mu_max: float = 20.0
    sigma_factor: float = 1.0 / 16
    # uncertainty
    uncertainty_threshold: float = 2.7
    history_length: int = 100
    psr_radius: int = 5
    # detector
    prior_growth: float = 1.05
    detector_periods: tuple = (math.inf, 250.0, 50.0, 10.0, 1.0)
    detector_scales: tuple = (0.5, 0.7, 1.0, 1.2, 1.5, 2.0)
    # geometry and features
    padding: float = 2.0
    template_max_side: float = 100.0
    cell_size: int = 4
    use_hog: bool = True
    use_colornames: bool = True
    use_gray: bool = True
    colornames_table: str = ""
    # scale filter
    num_scales: int = 33
    scale_step: float = 1.02
    scale_min: float = 0.2
    scale_max: float = 5.0
    scale_template: int = 32

    def __post_init__(self):
        self.detector_periods = tuple(float(p) for p in self.detector_periods)
        self.detector_scales = tuple(float(s) for s in self.detector_scales)
        self.validate()

    def validate(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; choose from {sorted(VARIANTS)}")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError("eta must be in [0, 1]")
        if len(self.detector_periods) < 2:
            raise ConfigError("the detector needs at least two filters")
        if not math.isinf(self.detector_periods[0]):
            raise ConfigError("the first detector filter must never be updated (period inf)")
        if self.detector_periods[-1] != 1.0:
            raise ConfigError("the last detector filter is the short-term model (period 1)")
        if any(p < 1 for p in self.detector_periods):
            raise ConfigError("detector periods must be >= 1")
        if not self.detector_scales or any(s <= 0 for s in self.detector_scales):
            raise ConfigError("detector scales must be positive")
        if self.num_scales < 1 or self.num_scales % 2 == 0:
            raise ConfigError("num_scales must be odd")
        if self.prior_growth < 1.0:
            raise ConfigError("prior_growth must be >= 1")
        if self.padding < 0 or self.template_max_side <= 0:
            raise ConfigError("padding must be >= 0 and template_max_side > 0")
        # constructing the sub-configs validates the remaining fields
        try:
            self.admm_config()
            self.uncertainty_config()
            FeatureConfig(self.cell_size, self.use_hog, self.use_colornames, self.use_gray)
        except Exception as exc:
            raise ConfigError(str(exc)) from None

    @property
    def n_de(self):
        return len(self.detector_periods)

    def admm_config(self):
        return AdmmConfig(self.lam, self.mu_init, self.mu_scale, self.mu_max, self.admm_iterations)

    def uncertainty_config(self):
        return UncertaintyConfig(self.uncertainty_threshold, self.history_length, self.psr_radius)

    def feature_config(self):
        """Feature settings with the color-name table resolved.

        Color names are dropped (with a warning) when no usable table exists.
        """
        path = resolve_colornames_path(self.colornames_table)
        use_cn = self.use_colornames
        if use_cn and not path:
            log.warning("no color-name table configured; using HOG and gray features only")
            use_cn = False
        elif use_cn and not colornames_available(path):
            use_cn = False
        if not (self.use_hog or use_cn or self.use_gray):
            raise ConfigError("no feature family left enabled")
        return FeatureConfig(self.cell_size, self.use_hog, use_cn, self.use_gray,
                             path if use_cn else None)

    def detector_pairs(self):
        """Filter indices and scales the detector cycles through."""
        filters, scales = VARIANTS[self.variant]
        if filters is None:
            filters = tuple(range(self.n_de))
        elif filters == "st":
            filters = (self.n_de - 1,)
        if scales is None:
            scales = self.detector_scales
        return tuple(filters), tuple(scales)

    @property
    def detector_enabled(self):
        filters, scales = self.detector_pairs()
        return bool(filters) and bool(scales)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    # -- text round trip ----------------------------------------------------

    def to_text(self):
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, source="<config>"):
        types = {f.name: f for f in fields(cls)}
        defaults = cls()
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _parse_value(value, getattr(defaults, key))
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
        return cls(**values)

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text, str(path))

    def save(self, path):
        Path(path).write_text(self.to_text())


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def _parse_value(text, default):
    if isinstance(default, bool):
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if isinstance(default, tuple):
        return tuple(float(x) for x in text.split(",") if x.strip())
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text
