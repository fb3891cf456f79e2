"""Smoke test for the twk_py extension module."""

import math

import twk_py as twk


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main():
    assert twk.levenshtein("abc", "bad") == 3.0

    a = twk.TimeSeries([0, 0, 1, 2, 1, 0, 0])
    b = twk.TimeSeries([0, 1, 2, 1, 0, 0, 0])
    assert len(a) == 7 and a.dim == 1 and a.times[0] == 1.0

    dtw = twk.Measure.distance("dtw")
    assert dtw.value(a, a) == 0.0
    assert dtw.value(a, b) >= 0.0
    twed = twk.Measure.distance("twed", nu=0.001, lambda_=1.0)
    assert close(twed.value(a, b), twed.value(b, a))

    k = twk.Measure.kernel("stwk_dtw", nu_prime=1.0)
    assert k.is_kernel and k.value(a, b) > 0.0
    assert close(k.dissimilarity(a, a), 0.0, 1e-6)

    items = [a, b, twk.TimeSeries([1, 1, 1, 1]), twk.TimeSeries([3, 2, 1])]
    g = twk.gram(items, twk.Measure.kernel("twip1", nu=0.01))
    report = twk.definiteness(g)
    assert report["verdict"] == "PSD", report
    values, vectors = twk.eigh(g)
    assert len(values) == 4 and len(vectors) == 4
    assert all(x >= y for x, y in zip(values, values[1:]))

    train, test = twk.Dataset.synthetic(classes=2, train_per_class=8, test_per_class=8, seed=3)
    err = twk.knn_error(train, test, dtw)
    assert 0.0 <= err <= 100.0
    model = twk.SvmModel(train, dtw, 10.0, 10.0)
    pred = model.predict(test)
    assert len(pred) == len(test)
    assert '"C"' in model.to_json()
    direct = twk.SvmModel(train, twk.Measure.kernel("stwk_dtw", nu_prime=0.5), 10.0, direct=True)
    assert len(direct.predict(test)) == len(test)
    try:
        twk.SvmModel(train, dtw, 1.0, direct=True)
    except ValueError:
        pass
    else:
        raise AssertionError("direct mode needs a kernel measure")

    try:
        dtw.value(a, twk.TimeSeries([]))
    except ValueError:
        pass
    else:
        raise AssertionError("empty series should be rejected")

    print(f"ok: knn error {err:.2f}, svm error {model.error_rate(test):.2f}, "
          f"twip1 delta_p {report['delta_p']}, max eig {values[0]:.3f}")
    assert math.isfinite(values[0])


if __name__ == "__main__":
    main()
