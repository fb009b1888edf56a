import gzip

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dca_ids.dataset import (
    ANOMALOUS,
    ATTRIBUTE_NAMES,
    NORMAL,
    binarize_label,
    iter_kdd_file,
    kfold_split,
    minmax_normalize,
    parse_kdd_record,
    read_kdd_file,
    write_fold_assignments,
)
from dca_ids.errors import ConfigurationError, ParseError

from conftest import make_line, make_record


class TestParse:
    def test_basic_fields(self):
        record = make_record(label="normal.")
        assert record.protocol == "tcp"
        assert record.service == "http"
        assert record.flag == "SF"
        assert record.label == "normal"

    def test_attack_label(self):
        record = make_record(label="teardrop.", protocol_type="udp",
                             service="private")
        assert record.label == "teardrop"
        assert record.protocol == "udp"

    def test_label_without_period(self):
        assert make_record(label="smurf").label == "smurf"

    def test_field_count_mismatch(self):
        line = ",".join(["0"] * 41)
        with pytest.raises(ParseError, match="expected 42 fields"):
            parse_kdd_record(line, line_number=17)

    def test_error_names_line_number(self):
        with pytest.raises(ParseError, match="line 17"):
            parse_kdd_record("0,0", line_number=17)

    def test_non_numeric_continuous_names_column(self):
        with pytest.raises(ParseError, match="duration"):
            parse_kdd_record(make_line(duration="abc"))

    def test_negative_continuous_rejected(self):
        with pytest.raises(ParseError, match="non-negative"):
            parse_kdd_record(make_line(src_bytes="-4"))

    def test_roundtrip(self):
        record = make_record(label="smurf.", duration=12, src_bytes=1032,
                             serror_rate=0.25, count=511)
        assert parse_kdd_record(record.serialize()) == record

    def test_attribute_count(self):
        assert len(ATTRIBUTE_NAMES) == 41
        assert len(make_record().values) == 41


class TestBinarizeLabel:
    def test_normal(self):
        assert binarize_label("normal") == NORMAL

    def test_attack(self):
        assert binarize_label("smurf") == ANOMALOUS

    def test_empty(self):
        assert binarize_label("") == ANOMALOUS

    @given(st.text(max_size=20))
    def test_total_and_two_valued(self, label):
        assert binarize_label(label) in (NORMAL, ANOMALOUS)


class TestKfold:
    def test_exact_sizes(self):
        folds = kfold_split(10, 10, seed=1)
        assert sorted(np.bincount(folds)) == [1] * 10

    def test_near_equal_sizes(self):
        folds = kfold_split(11, 10, seed=1)
        assert sorted(np.bincount(folds)) == [1] * 9 + [2]

    def test_deterministic(self):
        assert (kfold_split(100, 10, seed=3) == kfold_split(100, 10, seed=3)).all()

    def test_partition(self):
        folds = kfold_split(57, 10, seed=5)
        for i in range(10):
            test = np.flatnonzero(folds == i)
            train = np.flatnonzero(folds != i)
            combined = np.sort(np.concatenate([test, train]))
            assert (combined == np.arange(57)).all()

    def test_k_too_large(self):
        with pytest.raises(ConfigurationError):
            kfold_split(5, 10, seed=1)

    def test_k_too_small(self):
        with pytest.raises(ConfigurationError):
            kfold_split(5, 1, seed=1)

    @given(st.integers(2, 12), st.integers(0, 1000))
    def test_sizes_differ_by_at_most_one(self, k, seed):
        folds = kfold_split(37, min(k, 37), seed)
        counts = np.bincount(folds)
        assert counts.max() - counts.min() <= 1

    def test_export(self, tmp_path):
        folds = kfold_split(5, 2, seed=1)
        path = tmp_path / "folds.tsv"
        write_fold_assignments(path, folds)
        rows = [line.split("\t") for line in path.read_text().splitlines()]
        assert [int(r[0]) for r in rows] == list(range(5))
        assert [int(r[1]) for r in rows] == list(folds)


class TestMinMax:
    def test_simple_range(self):
        out = minmax_normalize(np.array([[0.0], [5.0], [10.0]]))
        assert out.ravel().tolist() == [0.0, 0.5, 1.0]

    def test_constant_attribute_maps_to_zero(self):
        out = minmax_normalize(np.array([[3.0], [3.0], [3.0]]))
        assert out.ravel().tolist() == [0.0, 0.0, 0.0]

    def test_test_values_clamped(self):
        train = np.array([[0.0], [10.0]])
        test = np.array([[12.0], [-3.0]])
        _, test_norm = minmax_normalize(train, test)
        assert test_norm.ravel().tolist() == [1.0, 0.0]

    @given(st.lists(st.floats(0, 1e6), min_size=1, max_size=20),
           st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=20))
    def test_output_always_in_unit_interval(self, train, test):
        train_m = np.array(train).reshape(-1, 1)
        test_m = np.array(test).reshape(-1, 1)
        train_norm, test_norm = minmax_normalize(train_m, test_m)
        assert ((train_norm >= 0) & (train_norm <= 1)).all()
        assert ((test_norm >= 0) & (test_norm <= 1)).all()


class TestFileIo:
    def test_plain_file(self, tmp_path):
        path = tmp_path / "data.kdd"
        path.write_text(make_line() + "\n" + make_line(label="smurf.") + "\n")
        records = read_kdd_file(path)
        assert [r.label for r in records] == ["normal", "smurf"]

    def test_gzip_file(self, tmp_path):
        path = tmp_path / "data.kdd.gz"
        with gzip.open(path, "wt") as handle:
            handle.write(make_line() + "\n")
        assert len(read_kdd_file(path)) == 1

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "data.kdd"
        path.write_text(make_line() + "\n\n" + make_line() + "\n")
        assert len(list(iter_kdd_file(path))) == 2
