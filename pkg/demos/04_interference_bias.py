#!/usr/bin/env python3
"""Show how network interference biases user-level A/B tests.

Treatment here spreads: treated users send invitations, so control
users with treated friends get partially treated too. Under user-level
randomization every control user sits next to treated ones and the
measured gap collapses toward zero. Randomizing whole clusters keeps
most social neighborhoods in one arm, so the estimate stays near the
true effect.

The simulator knows both counterfactual worlds for every user, which
gives an exact truth to measure bias against. The exposure response
saturates, mimicking an invite feature where the first few invitations
matter most.

    python demos/04_interference_bias.py --seeds 8
"""

import argparse

import numpy as np

from netab import (GraphGenSpec, ResponseModel, clustering_from_labels,
                   estimate_ate, generate_graph, interference,
                   merge_random, simulate_campaign,
                   user_level_randomization)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--seeds", type=int, default=8)
    args = ap.parse_args()

    n = args.n
    resp = ResponseModel(tau=0.5, exposure_kind="saturating",
                         exposure_scale=2.0, exposure_shape=0.5,
                         noise_sd=0.5, p_t=0.1, p_c=0.02, horizon=5,
                         init_frac=0.03)
    rows = {"user level": [], "cluster level": []}
    leaks = {"user level": [], "cluster level": []}
    truth = []
    for s in range(args.seeds):
        gen = generate_graph(GraphGenSpec(
            model="planted_blocks", n=n, blocks=100, p_in=0.04,
            p_out=2e-5, feature_dim=0, seed=1000 + s))
        assigns = {
            "user level": user_level_randomization(n, 2, seed=s),
            "cluster level": merge_random(
                clustering_from_labels(gen.blocks), 2, seed=s,
                mode="size_balanced"),
        }
        for name, a in assigns.items():
            run = simulate_campaign(gen.graph, a.treated_mask(1), resp,
                                    seed=s, blocks=gen.blocks)
            rows[name].append(estimate_ate(a, run.outcome) - run.true_ate)
            leaks[name].append(interference(a, run.label))
            if name == "user level":
                truth.append(run.true_ate)

    print(f"true effect (mean over seeds): {np.mean(truth):+.4f}\n")
    print(f"{'randomization':<15} {'mean bias':>10} {'mean |bias|':>12} "
          f"{'interference':>13}")
    for name in rows:
        b = np.asarray(rows[name])
        print(f"{name:<15} {b.mean():>+10.4f} {np.abs(b).mean():>12.4f} "
              f"{np.mean(leaks[name]):>13.3f}")

    ratio = np.abs(rows['cluster level']).mean() \
        / np.abs(rows['user level']).mean()
    print(f"\ncluster-level mean |bias| is {ratio:.2f}x the user-level "
          "one; the interference column explains why: almost every")
    print("invitation crosses arms under user-level assignment.")


if __name__ == "__main__":
    main()
