import gzip
import io

import numpy as np
import pytest

from fappr.estimate import EstimateStore, read_scores, top_k, write_scores, write_store


def test_counts_and_finalize():
    st = EstimateStore(4).record(0, 1).record(0, 1).record(0, 2, 2)
    assert st.count(0, 1) == 2 and st.finalize(0, 2) == 0.5 and st.finalize(1, 1) == 0.0
    assert st.row(0) == {1: 0.5, 2: 0.5}
    assert st.record(3, 3, 0).count(3, 3) == 0 and (3, 3) not in st.counts


def test_record_many_and_merge():
    a = EstimateStore(3).record_many(np.array([0, 0, 1]), np.array([2, 2, 1]), 3)
    assert a.counts == {(0, 2): 2, (1, 1): 1}
    b = EstimateStore(3).record(0, 2)
    a.merge(b)
    assert a.count(0, 2) == 3
    with pytest.raises(ValueError):
        a.merge(EstimateStore(5))


def test_top_k_ties_lower_id():
    st = EstimateStore(10).record(0, 5, 3).record(0, 2, 3).record(0, 9, 4)
    assert top_k(st, 0, 2) == [(9, 0.4), (2, 0.3)]
    with pytest.raises(ValueError):
        st.top_k(0, 0)


def test_dense_and_sources():
    st = EstimateStore(2).record(1, 0, 2)
    assert st.sources() == [1]
    np.testing.assert_array_equal(st.to_dense(2), [[0, 0], [1, 0]])


def test_write_order():
    buf = io.StringIO()
    write_scores({1: {0: 0.5, 2: 0.5}, 0: {3: 0.1, 1: 0.9, 4: 0.0}}, buf, ["a", "b", "c", "d", "e"])
    assert buf.getvalue() == "a\tb\t0.9\na\td\t0.1\nb\ta\t0.5\nb\tc\t0.5\n"


@pytest.mark.parametrize("name", ["s.tsv", "s.tsv.gz"])
def test_round_trip(tmp_path, name):
    st = EstimateStore(3).record(0, 1, 2).record(0, 0).record(1, 1, 3)
    path = tmp_path / name
    write_store(st, path, ["x", "y"])
    assert read_scores(path) == {"x": {"y": pytest.approx(2 / 3), "x": pytest.approx(1 / 3)}, "y": {"y": 1.0}}
    if name.endswith(".gz"):
        first = path.read_bytes()
        write_store(st, path, ["x", "y"])
        assert path.read_bytes() == first
        assert gzip.decompress(first).startswith(b"x\ty\t")


def test_read_rejects_bad_rows(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("a\tb\n")
    with pytest.raises(ValueError, match="bad.tsv:1"):
        read_scores(p)
