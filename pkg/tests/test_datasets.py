import numpy as np
import pytest

from scrn.datasets import (
    PLUS_MINUS_ONE,
    ZERO_ONE,
    Dataset,
    LibsvmParseError,
    dataset_summary,
    parse_libsvm,
    relabel,
    serialize_libsvm,
)
from scrn.exceptions import InvalidInputError


def random_libsvm_text(rng, max_rows=12, max_features=8):
    """Random well-formed LIBSVM text for round-trip checks."""
    m = int(rng.integers(1, max_rows + 1))
    lines = []
    for i in range(m):
        label = float(rng.choice([-1.0, 1.0]))
        # at least one row keeps a feature so the parsed dataset has n >= 1
        low = 1 if i == 0 else 0
        n_nz = int(rng.integers(low, max_features + 1))
        idx = np.sort(rng.choice(np.arange(1, max_features + 1), n_nz, replace=False))
        toks = [repr(label)]
        for j in idx:
            val = float(np.round(rng.uniform(-5, 5), 6))
            if val == 0.0:
                val = 1.0
            toks.append(f"{j}:{val!r}")
        lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"


class TestParse:
    def test_minimal_handcrafted(self):
        ds = parse_libsvm(b"+1 1:0.5 3:2.0\n-1 2:1.0\n")
        assert ds.m == 2
        assert ds.n == 3
        assert ds.labels.tolist() == [1.0, -1.0]
        row0 = ds.X.getrow(0)
        assert dict(zip(row0.indices.tolist(), row0.data.tolist())) == {0: 0.5, 2: 2.0}
        row1 = ds.X.getrow(1)
        assert dict(zip(row1.indices.tolist(), row1.data.tolist())) == {1: 1.0}
        assert ds.label_convention == PLUS_MINUS_ONE

    def test_empty_feature_list_row(self):
        ds = parse_libsvm(b"+1\n-1 1:2.0\n")
        assert ds.m == 2
        assert ds.X.getrow(0).nnz == 0

    def test_trailing_comments(self):
        ds = parse_libsvm(b"1 1:1.0 # a comment\n0 2:3.0\n# full-line comment\n")
        assert ds.m == 2
        assert ds.label_convention == ZERO_ONE

    def test_zero_one_labels(self):
        ds = parse_libsvm(b"1 1:1.0\n0 1:2.0\n")
        assert ds.label_convention == ZERO_ONE

    def test_from_path(self, tmp_path):
        p = tmp_path / "toy.libsvm"
        p.write_text("+1 1:1.5\n-1 2:0.25\n")
        ds = parse_libsvm(str(p))
        assert ds.name == "toy"
        assert ds.m == 2 and ds.n == 2

    def test_n_features_override(self):
        ds = parse_libsvm(b"+1 1:1.0\n", n_features=10)
        assert ds.n == 10
        with pytest.raises(InvalidInputError):
            parse_libsvm(b"+1 5:1.0\n", n_features=3)

    def test_bad_label_reports_line(self):
        with pytest.raises(LibsvmParseError) as err:
            parse_libsvm(b"+1 1:1.0\nbogus 1:2.0\n")
        assert err.value.line_number == 2

    def test_bad_value_reports_line(self):
        with pytest.raises(LibsvmParseError) as err:
            parse_libsvm(b"+1 1:abc\n")
        assert err.value.line_number == 1

    def test_decreasing_indices_rejected(self):
        with pytest.raises(LibsvmParseError):
            parse_libsvm(b"+1 3:1.0 2:1.0\n")
        with pytest.raises(LibsvmParseError):
            parse_libsvm(b"+1 2:1.0 2:1.0\n")

    def test_empty_file_rejected(self):
        with pytest.raises(InvalidInputError):
            parse_libsvm(b"")
        with pytest.raises(InvalidInputError):
            parse_libsvm(b"# only comments\n")


class TestRoundTrip:
    def test_serialize_parse_fixpoint_on_random_files(self, rng):
        for _ in range(100):
            text = random_libsvm_text(rng)
            first = parse_libsvm(text.encode())
            canon = serialize_libsvm(first)
            second = parse_libsvm(canon.encode())
            assert serialize_libsvm(second) == canon
            assert np.array_equal(first.labels, second.labels)
            assert (first.X != second.X).nnz == 0

    def test_feature_dim_stable_under_row_permutation(self, rng):
        text = random_libsvm_text(rng, max_rows=10)
        lines = [ln for ln in text.splitlines() if ln]
        perm = rng.permutation(len(lines))
        shuffled = "\n".join(lines[i] for i in perm) + "\n"
        a = parse_libsvm(text.encode())
        b = parse_libsvm(shuffled.encode())
        assert a.n == b.n


class TestRelabel:
    def test_pm1_to_zero_one(self):
        ds = parse_libsvm(b"+1 1:1.0\n-1 1:2.0\n")
        out = relabel(ds, ZERO_ONE)
        assert out.labels.tolist() == [1.0, 0.0]
        assert out.label_convention == ZERO_ONE

    def test_idempotent(self):
        ds = parse_libsvm(b"1 1:1.0\n0 1:2.0\n")
        out = relabel(ds, ZERO_ONE)
        assert out is ds

    def test_round_trips_unchanged(self, rng):
        labels = rng.choice([-1.0, 1.0], 30)
        body = "\n".join(f"{float(lab)!r} 1:1.0" for lab in labels) + "\n"
        ds = parse_libsvm(body.encode())
        back = relabel(relabel(ds, ZERO_ONE), PLUS_MINUS_ONE)
        assert np.array_equal(back.labels, ds.labels)

    def test_rejects_other_labels(self):
        ds = parse_libsvm(b"2.5 1:1.0\n0.5 1:1.0\n")
        with pytest.raises(InvalidInputError):
            relabel(ds, ZERO_ONE)


class TestSummary:
    def test_summary_fields(self):
        ds = parse_libsvm(b"+1 1:1.0 3:1.0\n-1 2:1.0\n", name="toy")
        info = dataset_summary(ds)
        assert info["samples"] == 2
        assert info["features"] == 3
        assert info["nonzeros"] == 3
        assert info["label_counts"] == {-1.0: 1, 1.0: 1}
