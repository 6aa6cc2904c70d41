"""Run configuration: precision, seed, budgets and calibration constants.

Every report embeds ``RunConfig.constants()`` so results can be traced
back to the constants that produced them.  A config file holds
``key = value`` lines; ``#`` starts a comment.
"""

import dataclasses
import os
from dataclasses import dataclass, field


@dataclass
class RunConfig:
    precision: int = 53
    seed: int = 0
    # continuation
    rtol: float = 1e-14
    taylor_order: int = 24
    max_steps: int = 20000
    min_step: float = 1e-12
    # domain extension exponent: extend by NS**(-kappa)
    kappa: float = 3.0
    # calibration of the O(.) terms
    gamma_cal: float = 1.0     # zero bound: 2/eps^2 + gamma_cal*eps
    tau_cal: float = 0.0       # gap conversion: tau_eps = 2/eps^2 + tau_cal*eps
    chi_cal: float = 0.0       # gap conversion: chi_eps = 8 eps^-4 ln(1/eps) + chi_cal*eps^-4
    c_cal: float = 8.0         # low value disc: m >= exp(-c_cal * B) * M, B the gap-2 index
    subadd_cal: float = 2.0    # product index: B(prod) <= subadd_cal * max(1, ln(n+1)) * sum B
    ode_cal: float = 1.0       # index from a linear ODE: ode_cal * (M + k ln(k+1))
    degree_cal: float = 1.0    # census hypersurface degree schedule
    # sampling
    circle_samples: int = 256
    domain_grid_level: int = 2
    base_samples: int = 17
    # budgets
    groebner_budget: int = 20000
    census_node_budget: int = 200
    extra: dict = field(default_factory=dict)

    CALIBRATION = ("kappa", "gamma_cal", "tau_cal", "chi_cal", "c_cal", "subadd_cal", "ode_cal", "degree_cal")

    def constants(self):
        return {k: getattr(self, k) for k in self.CALIBRATION}

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_file(cls, path):
        values = {}
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key = value")
                key, val = (s.strip() for s in line.split("=", 1))
                values[key] = val
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values):
        kwargs, extra = {}, {}
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        for key, val in values.items():
            if key in types and key != "extra":
                cast = {"int": int, "float": float}.get(types[key], float)
                kwargs[key] = cast(val) if isinstance(val, str) else val
            else:
                extra[key] = val
        return cls(extra=extra, **kwargs)

    @classmethod
    def load(cls, path=None):
        """Config from ``path``, else ``$NOETHER_CONFIG``, else defaults."""
        path = path or os.environ.get("NOETHER_CONFIG")
        return cls.from_file(path) if path else cls()


DEFAULT = RunConfig()
