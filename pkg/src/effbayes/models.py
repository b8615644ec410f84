"""Named models shipped with the package, and JSON model descriptions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as F

from .freedman import FreedmanPrior, build_freedman_prior, default_prior
from .measures import (
    AtomicPrior,
    BernoulliProduct,
    CantorCodedBernoulli,
    IIDSimplex,
    JointMeasure,
    PolyDensityPrior,
    likelihood_from_dict,
    prior_from_dict,
)
from .numeric import as_fraction
from .spaces import CantorPoint, SimplexPoint, point_from_dict


@dataclass(frozen=True)
class Model:
    name: str
    description: str
    joint: JointMeasure
    freedman: FreedmanPrior | None = None

    def to_dict(self):
        if self.freedman is not None:
            return {"kind": "freedman", **self.freedman.to_dict()}
        return self.joint.to_dict()


def _bern(prior) -> JointMeasure:
    return JointMeasure(prior, BernoulliProduct())


def _registry() -> dict[str, Model]:
    fp = default_prior()
    reversal_atoms = AtomicPrior.of((F(1, 4), CantorPoint((1,), (0,))), (F(1, 4), CantorPoint((1, 1), (0,))),
                                    (F(1, 4), CantorPoint((1, 0, 1), (0,))), (F(1, 4), CantorPoint((), (1,))))
    models = [
        Model("bernoulli-two-atom", "1/2 d(1/3) + 1/2 d(2/3), Bernoulli",
              _bern(AtomicPrior.of((F(1, 2), F(1, 3)), (F(1, 2), F(2, 3))))),
        Model("bernoulli-quarters", "1/2 d(1/4) + 1/2 d(3/4), Bernoulli",
              _bern(AtomicPrior.of((F(1, 2), F(1, 4)), (F(1, 2), F(3, 4))))),
        Model("bernoulli-endpoints", "1/2 d(0) + 1/2 d(1), Bernoulli",
              _bern(AtomicPrior.of((F(1, 2), F(0)), (F(1, 2), F(1))))),
        Model("bernoulli-three-atom", "atoms 1/10, 1/2, 9/10 with weights 1/4, 1/2, 1/4, Bernoulli",
              _bern(AtomicPrior.of((F(1, 4), F(1, 10)), (F(1, 2), F(1, 2)), (F(1, 4), F(9, 10))))),
        Model("bernoulli-lebesgue", "uniform prior on [0,1], Bernoulli", _bern(PolyDensityPrior.lebesgue())),
        Model("bernoulli-beta-2-3", "Beta(2,3) prior, Bernoulli", _bern(PolyDensityPrior.beta(2, 3))),
        Model("simplex-finite-atoms", "1/2 d(1/2,1/4,1/4) + 1/2 d(1/3,1/3,1/3), i.i.d. on the simplex",
              JointMeasure(AtomicPrior.of((F(1, 2), SimplexPoint.finite([F(1, 2), F(1, 4), F(1, 4)])),
                                          (F(1, 2), SimplexPoint.finite([F(1, 3)] * 3))), IIDSimplex())),
        Model("freedman-default", "1/2 d(geometric(1/2,1/2)) + 1/2 d(1/2,1/2,0,...), i.i.d. on the simplex",
              fp.joint, fp),
        Model("cantor-reversal-base", "four eventually periodic Cantor points, coded Bernoulli",
              JointMeasure(reversal_atoms, CantorCodedBernoulli())),
    ]
    return {m.name: m for m in models}


MODELS = _registry()


def get_model(name: str) -> Model:
    try:
        return MODELS[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; known: {', '.join(sorted(MODELS))}") from None


def model_from_dict(d) -> Model:
    """A registry name, or {"prior": ..., "likelihood": ...}, or {"kind": "freedman", ...}."""
    if isinstance(d, str):
        return get_model(d)
    if d.get("kind") == "freedman":
        positive = point_from_dict(d["positive"])
        nulls = [(point_from_dict(n["point"]), int(n["zero_coordinate"])) for n in d["nulls"]]
        weights = [as_fraction(d["positive_weight"])] + [as_fraction(n["weight"]) for n in d["nulls"]]
        fp = build_freedman_prior(positive, nulls, weights)
        return Model("custom-freedman", "user supplied", fp.joint, fp)
    jm = JointMeasure(prior_from_dict(d["prior"]), likelihood_from_dict(d["likelihood"]))
    return Model(d.get("name", "custom"), "user supplied", jm)
