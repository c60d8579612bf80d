"""Smoke test for the compiled extension: `python python/smoke_test.py`."""

import math

import relaxmc_py as rm


def main():
    m, n, r = 30, 24, 2
    matrix = rm.generate(m, n, r, "incoherent", seed=3)
    assert len(matrix) == m and len(matrix[0]) == n

    profile = rm.leverage(matrix, r)
    assert math.isclose(sum(profile.row_scores) * r / m, r, rel_tol=1e-9)
    total = sum(profile.relaxed_score(i, j) for i in range(m) for j in range(n))
    assert math.isclose(total, profile.degrees_of_freedom, rel_tol=1e-9)

    probs = profile.probabilities("relaxed", 3.0)
    assert all(0.0 <= p <= 1.0 for row in probs for p in row)

    sample = rm.sample(matrix, probs, seed=5)
    assert 0 < len(sample) <= m * n
    i, j, p, value = sample.entries()[0]
    assert (i, j) in sample and value == matrix[i][j] and p == probs[i][j]

    done = rm.complete(sample)
    assert done.converged
    for i, j, _, value in sample.entries():
        assert abs(done.solution[i][j] - value) < 1e-4

    try:
        rm.leverage(matrix, 0)
    except ValueError:
        pass
    else:
        raise AssertionError("rank 0 accepted")

    print(f"ok: |Omega|={len(sample)} iterations={done.iterations}")


if __name__ == "__main__":
    main()
