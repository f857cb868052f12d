#!/usr/bin/env python3
"""Writes the bundled benchmark scenes into this directory.

Run from anywhere: python3 generate.py
"""
import json
import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
PI = math.pi


def arm(base, home, links=(0.3, 0.25)):
    return {
        "base": list(base),
        "link_lengths": list(links),
        "link_radius": 0.02,
        "home": list(home),
        "v_max": 1.0,
    }


def skills(nominal=1.0):
    def spec(name, gen):
        return {
            "name": name,
            "nominal_duration": nominal,
            "duration_jitter": {
                "min": round(0.8 * nominal, 6),
                "median": round(1.23 * nominal, 6),
                "max": round(nominal + 2.0, 6),
            },
            "reference_path_generator": gen,
        }

    return [
        spec("pick", "two_step_attach_twist"),
        spec("place-down", "two_step_attach_twist"),
        spec("place-up", "two_step_attach_twist"),
        spec("handover", "single_step_goal_reach"),
        spec("support-bottom", "single_step_goal_reach"),
        spec("support-top", "single_step_goal_reach"),
    ]


def disc(i, tag, x, y, r=0.02):
    return {"id": i, "kind": {"disc": {"radius": r}}, "type_tag": tag,
            "pose": {"x": round(x, 4), "y": round(y, 4), "theta": 0.0}}


def pose(x, y, th=0.0):
    return {"x": round(x, 4), "y": round(y, 4), "theta": th}


def step(idx, tag, target, support=None, handover=None):
    s = {
        "index": idx,
        "required_type": tag,
        "target_pose": pose(*target),
        "needs_support": support is not None,
        "needs_handover": handover is not None,
    }
    if support is not None:
        s["support_region"] = [pose(*p) for p in support]
    if handover is not None:
        s["handover_pose"] = pose(*handover)
    return s


def support_ring(t, d=0.13):
    x, y = t
    return [(x, y - d), (x - d, y), (x + d, y), (x, y + d)]


def supply(rng, n, xr, yr, base, reach=0.52, inner=0.2):
    out = []
    while len(out) < n:
        x, y = rng.uniform(*xr), rng.uniform(*yr)
        d = math.hypot(x - base[0], y - base[1])
        if inner <= d <= reach:
            out.append((x, y))
    return out


def scene(robots, objects, steps, dt=0.05, margin=0.03, seed=0, nominal=1.0):
    return {
        "robots": robots,
        "objects": objects,
        "obstacles": [],
        "steps": steps,
        "skills": skills(nominal),
        "params": {"dt": dt, "P": 4, "seed": seed, "margin": margin},
    }


LEFT = (0.0, 0.0)
RIGHT = (0.8, 0.0)


def shared_pair(name, n_steps, supported, handovers, seed, kinds=1):
    """Two facing arms sharing a central build area.

    With several kinds, step j needs kind j % kinds and each side stocks
    its share of every kind plus one spare.
    """
    rng = random.Random(seed)
    robots = [arm(LEFT, (PI, 0.0)), arm(RIGHT, (0.0, 0.0))]
    tags = ["brick"] if kinds == 1 else ["brick%d" % t for t in range(kinds)]
    objs = []
    for base, xr in ((LEFT, (-0.45, -0.15)), (RIGHT, (0.95, 1.25))):
        for t, tag in enumerate(tags):
            need = sum(1 for j in range(n_steps) if j % len(tags) == t)
            for (x, y) in supply(rng, need // 2 + 2 if kinds == 1 else need // 2 + 1, xr, (-0.3, 0.3), base):
                objs.append(disc(len(objs), tag, x, y))
    steps = []
    for j in range(n_steps):
        t = (rng.uniform(0.34, 0.46), rng.uniform(0.12, 0.28))
        sup = support_ring(t) if (j in supported or j in handovers) else None
        ho = (0.4, -0.2) if j in handovers else None
        steps.append(step(j + 1, tags[j % len(tags)], t, sup, ho))
    return name, scene(robots, objs, steps, seed=seed)


def independent_pair(name, n_steps, seed):
    """Two arms far apart, each with its own parts and build area."""
    rng = random.Random(seed)
    right = (1.6, 0.0)
    robots = [arm(LEFT, (PI, 0.0)), arm(right, (0.0, 0.0))]
    objs = []
    n = n_steps // 2 + 2
    for (x, y) in supply(rng, n, (-0.45, -0.15), (-0.3, 0.3), LEFT):
        objs.append(disc(len(objs), "left", x, y))
    for (x, y) in supply(rng, n, (1.75, 2.05), (-0.3, 0.3), right):
        objs.append(disc(len(objs), "right", x, y))
    steps = []
    for j in range(n_steps):
        if j % 2 == 0:
            t = (rng.uniform(0.25, 0.4), rng.uniform(0.1, 0.3))
            tag = "left"
        else:
            t = (rng.uniform(1.2, 1.35), rng.uniform(0.1, 0.3))
            tag = "right"
        steps.append(step(j + 1, tag, t))
    return name, scene(robots, objs, steps, seed=seed)


def multi_arm(name, n_arms, n_steps, seed):
    """Three or four arms around a small central plate."""
    rng = random.Random(seed)
    bases = [LEFT, RIGHT, (0.4, 0.45), (0.4, -0.45)][:n_arms]
    homes = [(PI, 0.0), (0.0, 0.0), (PI / 2, 0.0), (-PI / 2, 0.0)][:n_arms]
    robots = [arm(b, h) for b, h in zip(bases, homes)]
    regions = [
        ((-0.45, -0.2), (-0.2, 0.2)),
        ((1.0, 1.25), (-0.2, 0.2)),
        ((0.2, 0.6), (0.75, 0.95)),
        ((0.2, 0.6), (-0.95, -0.75)),
    ]
    objs = []
    per = n_steps // n_arms + 2
    for b, (xr, yr) in zip(bases, regions):
        for (x, y) in supply(rng, per, xr, yr, b):
            objs.append(disc(len(objs), "brick", x, y))
    steps = []
    ylo, yhi = (0.0, 0.1) if n_arms == 3 else (-0.05, 0.05)
    for j in range(n_steps):
        t = (rng.uniform(0.32, 0.48), rng.uniform(ylo, yhi))
        steps.append(step(j + 1, "brick", t))
    return name, scene(robots, objs, steps, seed=seed)


def tiny():
    """One supported step; coarse steps keep the graph at ten nodes."""
    robots = [arm(LEFT, (PI, 0.0)), arm(RIGHT, (0.0, 0.0))]
    objs = [disc(0, "brick", -0.35, 0.0)]
    t = (0.45, 0.3)
    steps = [step(1, "brick", t, support_ring(t))]
    return "tiny.scn", scene(robots, objs, steps, dt=10, seed=0)


def main():
    fixtures = [
        shared_pair("cliff.scn", 11, supported={2, 6}, handovers={8}, seed=11),
        shared_pair("tower.scn", 6, supported={1, 3, 5}, handovers=set(), seed=6),
        shared_pair("bridge.scn", 16, supported={3, 9}, handovers={5, 12}, seed=16),
        shared_pair("faucet.scn", 24, supported={4, 10, 18}, handovers={7, 20}, seed=24, kinds=4),
        shared_pair("stadium.scn", 40, supported={5, 15, 25, 35}, handovers={10, 30}, seed=40, kinds=10),
        independent_pair("twin_rows.scn", 10, seed=10),
        independent_pair("twin_towers.scn", 20, seed=20),
        multi_arm("tri_arm.scn", 3, 9, seed=3),
        multi_arm("quad_arm.scn", 4, 12, seed=4),
        tiny(),
    ]
    for name, data in fixtures:
        with open(os.path.join(HERE, name), "w") as f:
            json.dump(data, f, indent=1)
            f.write("\n")


if __name__ == "__main__":
    main()
