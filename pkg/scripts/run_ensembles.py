#!/usr/bin/env python3
"""Seeded random-ensemble experiments.

Three studies, mirroring the property suites but with adjustable sizes:

* feedthrough: invertibility of the instantaneous input-output map versus
  invertibility of the stacked constraint/output matrix,
* routes: agreement of the subspace iteration, the quadruple iteration
  and the constructive reduction on the zero-dynamics order,
* decay: open-loop trajectory envelopes for systems with traversal-map
  spectral radius below 1.
"""

import argparse
import os

import numpy as np

import phzero as pz
from phzero.ensembles import (
    random_siso_system,
    random_square_system,
    random_stable_system,
)


def study_feedthrough(rng, count):
    agree = excluded = 0
    for i in range(count):
        sysr = random_square_system(rng, singular_stack=bool(i % 2))
        e = pz.feedthrough(sysr)
        d = pz.discrete_reduce(sysr)
        anchor = max(np.linalg.norm(e, 2),
                     np.linalg.norm(sysr.Ky, 2) * np.linalg.norm(d.Bd, 2), 1e-300)
        rel_e = np.linalg.svd(e, compute_uv=False)[-1] / anchor
        sv = np.linalg.svd(np.vstack([sysr.K0, sysr.Ky]), compute_uv=False)
        rel_s = sv[-1] / max(sv[0], 1e-300)
        if 1e-8 < rel_e < 1e-6 or 1e-8 < rel_s < 1e-6:
            excluded += 1
            continue
        assert (rel_e > 1e-8) == (rel_s > 1e-8), f"disagreement at sample {i}"
        agree += 1
    print(f"feedthrough equivalence: {agree} agree, {excluded} excluded, 0 violations")


def study_routes(rng, count):
    agree = vanished = 0
    for i in range(count):
        sysr = random_siso_system(rng, reduction_depth=i % 2, sparse=bool(i % 3 == 0))
        v = pz.vstar_discrete(*pz.output_nulling_stacks(sysr))
        v2 = pz.vstar_from_quadruple(pz.discrete_reduce(sysr))
        assert v.dim == v2.dim
        try:
            res = pz.reduce(sysr)
        except pz.ReductionError:
            assert pz.scan_zeros(sysr).identically_zero
            vanished += 1
            continue
        assert res.k == v.dim
        agree += 1
    print(f"route equivalence: {agree} agree, {vanished} identically-zero maps")


def study_decay(rng, count):
    worst_margin = np.inf
    for _ in range(count):
        radius = float(rng.uniform(0.3, 0.9))
        sysr, _ = random_stable_system(rng, radius=radius)
        _, r = pz.is_exponentially_stable(sysr)
        z0 = rng.uniform(-1, 1, (sysr.n, 8))
        tr = pz.simulate(sysr, z0, None, steps=40)
        norms = np.linalg.norm(tr.states.reshape(41, -1), axis=1)
        base = r + 0.05
        c = max(norms[s] / base**s for s in range(sysr.n + 1))
        margins = [c * base**s - norms[s] for s in range(sysr.n, 41)]
        worst_margin = min(worst_margin, min(margins))
    assert worst_margin >= -1e-12
    print(f"decay envelopes hold; worst margin {worst_margin:.3e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int,
                        default=int(os.environ.get("PHZERO_SEED", 20240901)))
    parser.add_argument("--feedthrough", type=int, default=1000)
    parser.add_argument("--routes", type=int, default=200)
    parser.add_argument("--decay", type=int, default=100)
    args = parser.parse_args()
    print(f"seed: {args.seed}")
    study_feedthrough(np.random.default_rng(args.seed + 5), args.feedthrough)
    study_routes(np.random.default_rng(args.seed + 6), args.routes)
    study_decay(np.random.default_rng(args.seed + 8), args.decay)


if __name__ == "__main__":
    main()
