"""Smoke test for the Python bindings. Run after `maturin develop`."""

import math

import monosplit as ms


def main():
    rot = ms.make_problem("rotation", n=1)
    assert rot.dim == 2 and rot.constants["l"] == 1.0

    run = ms.solve(rot, "forb", [1.0, 0.0], 0.4, max_iters=5000)
    assert run.status == "converged", run
    assert run.final_residual <= 1e-10
    assert ms.energy_violations(run, rot) == 0

    tseng = ms.solve(rot, "tseng", [1.0, 0.0], 1 / math.sqrt(2), max_iters=200, tol=0.0)
    rho, r2 = ms.estimate_rate(tseng)
    assert abs(rho - math.sqrt(3) / 2) < 1e-6 and r2 > 0.999999

    fb = ms.solve(rot, "forward_backward", [1.0, 0.0], 0.3)
    assert fb.status == "diverged"

    cubic = ms.make_problem("cubic")
    ls = ms.solve(cubic, "forb_linesearch", [1.0], {"delta": 0.9, "sigma": 0.5, "lambda0": 10.0}, max_iters=5000)
    assert ls.status == "converged" and abs(ls.final_point[0]) < 1e-8
    assert len(ls.backtracks) == ls.iterations

    assert ms.max_stepsize("forb", l=2.0) == 0.25
    assert abs(ms.max_stepsize("relaxed_inertial", l=1.0, alpha=0.2, cocoercive=True) - 0.6) < 1e-15

    split = ms.make_problem("split_rotation", n=1)
    a = ms.solve(split, "stochastic_forb", [1.0, 0.0], 0.2, seed=3, max_iters=300)
    b = ms.solve(split, "stochastic_forb", [1.0, 0.0], 0.2, seed=3, max_iters=300)
    assert a.iterates == b.iterates and a.sampled_indices == b.sampled_indices

    try:
        ms.solve(rot, "newton", [1.0, 0.0], 0.1)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown method accepted")

    assert "forb bound: 1/(2L)" in ms.catalog()["methods"]
    print("smoke test passed")


if __name__ == "__main__":
    main()
