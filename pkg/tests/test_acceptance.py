"""Acceptance suite: one test per criterion, each logging a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from mcpiso.density import (
    ModelDensity,
    TabulatedDensity,
    f_lower,
    lower_bound_contacts,
    mixture_density,
    random_mcp_density,
    sup_bound,
    validate_cd,
    validate_mcp,
)
from mcpiso.kernel import CurvatureParams, Tolerance
from mcpiso.oracle import min_perimeter_bruteforce, rigidity_probe, verify_sharpness
from mcpiso.profile import A_fun, a_of_volume, profile_restricted

VOLUMES = (0.1, 0.25, 0.5, 0.75, 0.9)
ORACLE_TUPLES = [CurvatureParams(0, 2, 1), CurvatureParams(0, 3.5, 1),
                 CurvatureParams(-1, 2, 1), CurvatureParams(1, 2, 2)]


def record(log, name, ok, detail):
    log.append((name, bool(ok), detail))
    assert ok, f"{name}: {detail}"


def normalized_sine(N, M=401):
    x = np.linspace(0, math.pi, M)
    norm = math.sqrt(math.pi) * math.gamma(N / 2) / math.gamma((N + 1) / 2)
    return TabulatedDensity(math.pi, np.sin(x) ** (N - 1) / norm)


def test_c1_spot_values(acceptance_log):
    start = time.perf_counter()
    got = {
        "f_{0,2,1}(1/2)": (f_lower(CurvatureParams(0, 2, 1), 0.5), 2 / 3),
        "I_{0,2,1}(1/2)": (profile_restricted(CurvatureParams(0, 2, 1), 0.5).value, 2 / 3),
        "I_{0,2,2}(1/2)": (profile_restricted(CurvatureParams(0, 2, 2), 0.5).value, 1 / 3),
        "I_{1,2,pi}(1/2)": (profile_restricted(CurvatureParams(1, 2, math.pi), 0.5).value, 1 / 2),
        "a_{0,2,1}(7/52)": (a_of_volume(CurvatureParams(0, 2, 1), 7 / 52), 1 / 4),
    }
    worst = max(abs(a - b) for a, b in got.values())
    record(acceptance_log, "C1 closed-form spot values", worst <= 1e-8,
           f"max error {worst:.2e} (tol 1e-8), {time.perf_counter() - start:.3f}s")


def test_c2_oracle_equivalence(acceptance_log):
    start = time.perf_counter()
    grids = (1024, 2048)
    worst_2048, worst_by_grid, envelope_ok, ratios = 0.0, dict.fromkeys(grids, 0.0), True, []
    for p in ORACLE_TUPLES:
        for v in VOLUMES:
            ref = profile_restricted(p, v)
            h = ModelDensity(p, ref.a_v)
            fine = h(np.linspace(0, p.D, 8193))
            lip = np.max(np.abs(np.diff(fine))) / (p.D / 8192)
            spread = max(0.5, 2 * fine.max() / fine.min())
            errs = {}
            for g in grids:
                rep = min_perimeter_bruteforce(h, v, max_intervals=2, grid=g, reference=ref.value)
                errs[g] = abs(rep.margin)
                worst_by_grid[g] = max(worst_by_grid[g], errs[g])
                # first-order envelope: one window of slack in x around a_v
                envelope_ok &= errs[g] <= lip * spread * p.D / g
            worst_2048 = max(worst_2048, errs[2048])
            if errs[1024] > 0:
                ratios.append(errs[2048] / errs[1024])
    halved = worst_by_grid[2048] <= 0.5 * worst_by_grid[1024]
    elapsed = time.perf_counter() - start
    ok = worst_2048 <= 5e-3 and halved and envelope_ok and elapsed < 120
    record(acceptance_log, "C2 oracle equivalence on model densities", ok,
           f"max |err| at 2048 = {worst_2048:.2e} (tol 5e-3); worst error 1024->2048: "
           f"{worst_by_grid[1024]:.2e}->{worst_by_grid[2048]:.2e}; per-case ratios "
           f"{min(ratios):.2f}..{max(ratios):.2f}; first-order envelope held: {envelope_ok}; "
           f"{elapsed:.1f}s")


def test_c3_lower_bound_certification(acceptance_log):
    start = time.perf_counter()
    worst, where = math.inf, None
    runs = 0
    for p in ORACLE_TUPLES:
        for v in VOLUMES:
            rep = verify_sharpness(p, v, trials=50, seed=0, grid=1024)
            runs += rep.trials
            if rep.margin < worst:
                worst, where = rep.margin, (p.as_dict(), v)
    elapsed = time.perf_counter() - start
    ok = worst >= -5e-3 and elapsed < 300
    record(acceptance_log, "C3 lower-bound certification", ok,
           f"{runs} random MCP densities, worst margin {worst:+.2e} at {where} "
           f"(need >= -5e-3), {elapsed:.1f}s")


def test_c4_validator_truth_table(acceptance_log):
    start = time.perf_counter()
    mcp_worst, cd_best = math.inf, -math.inf
    for K in (-1, 0, 1):
        for N in (2, 3.5):
            for D in (1.0, 2.5):
                p = CurvatureParams(K, N, D)
                for frac in (0.1, 0.37, 0.5, 0.8):
                    h = ModelDensity(p, frac * D).tabulate(401)
                    mcp_worst = min(mcp_worst, validate_mcp(h, p).worst_violation)
                    cd_best = max(cd_best, validate_cd(h, p).worst_violation)
    sine_worst = math.inf
    for N in (2, 3, 4.5):
        p = CurvatureParams(N - 1, N, math.pi)
        h = normalized_sine(N)
        sine_worst = min(sine_worst, validate_mcp(h, p).worst_violation,
                         validate_cd(h, p).worst_violation)
    ok = mcp_worst >= -1e-9 and cd_best <= -1e-4 and sine_worst >= -1e-9
    record(acceptance_log, "C4 validator truth table", ok,
           f"model MCP worst {mcp_worst:+.1e} (>= -1e-9), model CD least-bad {cd_best:+.2e} "
           f"(<= -1e-4), sine both {sine_worst:+.1e} (>= -1e-9), {time.perf_counter() - start:.1f}s")


def _random_params(rng):
    N = rng.uniform(1.5, 5)
    K = rng.uniform(-3, 3)
    cap = math.pi * math.sqrt((N - 1) / K) if K > 0 else 3.0
    D = rng.uniform(0.5, min(3.0, 0.95 * cap))
    return CurvatureParams(K, N, D)


def test_c5_symmetry_and_scaling(acceptance_log):
    start = time.perf_counter()
    rng = np.random.default_rng(20240531)
    # the identities through a_v inherit the inversion residual, so solve well below 1e-10
    tight = Tolerance(quad_tol=1e-12, root_tol=1e-13)
    close = lambda a, b: abs(a - b) <= 1e-10 * max(1.0, abs(b))
    worst = dict.fromkeys(["f(x)=f(D-x)", "h reflection", "rescaling", "a_{1-v}=D-a_v", "A identity"], 0.0)
    fails = dict.fromkeys(worst, 0)

    def note(key, a, b):
        worst[key] = max(worst[key], abs(a - b) / max(1.0, abs(b)))
        fails[key] += not close(a, b)

    for _ in range(1000):
        p = _random_params(rng)
        x, a = rng.uniform(0, p.D), rng.uniform(0.01, 0.99) * p.D
        note("f(x)=f(D-x)", f_lower(p, x), f_lower(p, p.D - x))
        note("h reflection", ModelDensity(p, p.D - a)(p.D - x), ModelDensity(p, a)(x))
        Dp = p.D * rng.uniform(0.3, 3)
        z = rng.uniform(0, Dp)
        scaled = CurvatureParams((p.D / Dp) ** 2 * p.K, p.N, Dp)
        note("rescaling", (p.D / Dp) * ModelDensity(p, a)(z * p.D / Dp),
             ModelDensity(scaled, a * Dp / p.D)(z))
        v = rng.uniform(0.05, 0.95)
        av = a_of_volume(p, v, tight)
        note("a_{1-v}=D-a_v", a_of_volume(p, 1 - v, tight), p.D - av)
        note("A identity", (1 - v) / A_fun(p, p.D - av, tight), f_lower(p, av, tight))
    ok = not any(fails.values())
    detail = ", ".join(f"{k} {worst[k]:.1e}" for k in worst)
    record(acceptance_log, "C5 symmetry and scaling identities", ok,
           f"1000 draws each, max rel-or-abs error: {detail} (tol 1e-10), "
           f"{time.perf_counter() - start:.1f}s")


def test_c6_monotonicity(acceptance_log):
    start = time.perf_counter()
    params = [CurvatureParams(0, 2, 1), CurvatureParams(0, 3.5, 2), CurvatureParams(-1, 2, 1),
              CurvatureParams(-2, 4, 1.5), CurvatureParams(1, 2, 2.5), CurvatureParams(2, 3, 3.0)]
    a_step = f_step = math.inf
    for p in params:
        xs = np.linspace(0, p.D - 1e-6, 400)
        a_step = min(a_step, np.min(np.diff([A_fun(p, x) for x in xs])))
        xs = np.linspace(0, p.D / 2, 400)[1:]
        f_step = min(f_step, np.min(np.diff([f_lower(p, x) for x in xs])))
    dec_step, scaled_step = -math.inf, math.inf
    for K, N in ((0, 2), (0, 3.5), (-1, 2), (-1, 4)):
        Ds = np.linspace(0.25, 3, 40)
        for v in (0.1, 0.3, 0.5, 0.85):
            vals = [profile_restricted(CurvatureParams(K, N, D), v).value for D in Ds]
            dec_step = max(dec_step, np.max(np.diff(vals)))
    for K, N in ((1, 2), (2, 3.5), (0.5, 4)):
        Ds = np.linspace(0.02, 1, 40) * math.pi * math.sqrt((N - 1) / K)
        for v in (0.1, 0.3, 0.5, 0.85):
            vals = [D * profile_restricted(CurvatureParams(K, N, D), v).value for D in Ds]
            scaled_step = min(scaled_step, np.min(np.diff(vals)))
    ok = a_step >= 1e-12 and f_step >= 1e-12 and dec_step <= -1e-12 and scaled_step >= -1e-12
    record(acceptance_log, "C6 monotonicity suites", ok,
           f"min A step {a_step:.1e}, min f step {f_step:.1e} (>= 1e-12); "
           f"max D->I step {dec_step:.1e} (<= -1e-12); min D->D*I step {scaled_step:.1e} "
           f"(>= -1e-12), {time.perf_counter() - start:.1f}s")


def test_c7_sup_bound(acceptance_log):
    start = time.perf_counter()
    params = [CurvatureParams(0, 2, 1), CurvatureParams(0, 3.5, 2), CurvatureParams(-1, 2, 1),
              CurvatureParams(-2, 4, 1.5), CurvatureParams(1, 2, 2.5), CurvatureParams(1, 2, math.pi)]
    excess = -math.inf
    for p in params:
        bound = sup_bound(p)
        for seed in range(50):
            h = random_mcp_density(p, seed, k=1 + seed % 5)
            excess = max(excess, h.values.max() - bound)
        for frac in (1e-6, 1e-3, 0.1, 0.5, 0.9, 1 - 1e-3, 1 - 1e-6):
            h = ModelDensity(p, frac * p.D)
            excess = max(excess, float(np.max(h(np.linspace(0, p.D, 2001)))) - bound)
    value = sup_bound(CurvatureParams(-1, 2, 1))
    ref = math.sinh(1) / (math.cosh(1) - 1)
    ok = excess <= 1e-9 and abs(value - ref) <= 1e-8
    record(acceptance_log, "C7 sup bound", ok,
           f"max(sup h - bound) {excess:+.2e} (<= 1e-9); K=-1 bound {value:.12f} vs "
           f"{ref:.12f}, {time.perf_counter() - start:.1f}s")


def test_c8_rigidity(acceptance_log):
    start = time.perf_counter()
    # lower-bound rigidity: any MCP density touching f inside equals h^y
    touching, touch_dist, false_contacts = 0, 0.0, 0
    for p in (CurvatureParams(0, 2, 1), CurvatureParams(-1, 3, 1.5), CurvatureParams(1, 2, 2.0)):
        grid = np.linspace(0, p.D, 201)
        candidates = [ModelDensity(p, float(grid[i])).tabulate(201) for i in (7, 60, 100, 163)]
        candidates += [mixture_density(p, [grid[i], grid[j]], [1 - 1e-12, 1e-12], M=201)
                       for i, j in ((30, 120), (150, 10))]
        candidates += [random_mcp_density(p, s, k=3, M=201) for s in range(20)]
        for h in candidates:
            if not validate_mcp(h, p).passed:
                continue
            for y in lower_bound_contacts(h, p):
                touching += 1
                touch_dist = max(touch_dist, float(np.max(np.abs(
                    h.values - ModelDensity(p, y).tabulate(201).values))))
        false_contacts += sum(bool(lower_bound_contacts(random_mcp_density(p, s, k=3, M=201), p))
                              for s in range(20, 30))
    # rigid positive-curvature case
    rigid_dist, rigid_checked = 0.0, 0
    for N in (2, 3, 4.5):
        p = CurvatureParams(N - 1, N, math.pi)
        sine = normalized_sine(N).values
        for seed in range(20):
            h = random_mcp_density(p, seed, k=1 + seed % 4)
            if validate_mcp(h, p).passed:
                rigid_checked += 1
                rigid_dist = max(rigid_dist, float(np.max(np.abs(h.values - sine))))
    uniform_rejected = not validate_mcp(TabulatedDensity(math.pi, np.full(401, 1 / math.pi)),
                                        CurvatureParams(1, 2, math.pi)).passed
    # off-optimal mixtures keep a strictly positive optimality gap
    p, v = CurvatureParams(0, 2, 1), 0.3
    av, a1 = a_of_volume(p, v), a_of_volume(p, 1 - v)
    mixes = [mixture_density(p, [av, b], [0.5, 0.5], M=1025) for b in (0.1, 0.5, 0.9)]
    probe = rigidity_probe(p, v, eps=1e-3, trials=0, grid=1024,
                           densities=mixes + [ModelDensity(p, av), ModelDensity(p, a1)])
    gaps = [e.gap for e in probe.entries[:3]]
    extremal = [e.distance for e in probe.entries[3:]]
    ok = (touching > 0 and touch_dist <= 1e-6 and false_contacts == 0
          and rigid_checked == 60 and rigid_dist <= 1e-6 and uniform_rejected
          and min(gaps) > 0 and max(extremal) == 0.0)
    record(acceptance_log, "C8 rigidity probes", ok,
           f"{touching} contacts, max distance to h^y {touch_dist:.1e} (<= 1e-6); rigid case "
           f"{rigid_checked} densities within {rigid_dist:.1e} of sine (<= 1e-6); mixture gaps "
           f"{min(gaps):.3f}..{max(gaps):.3f} (> 0), {time.perf_counter() - start:.1f}s")
