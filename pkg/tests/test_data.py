import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sono import (DomainError, EmptyDatasetError, IngestionError,
                  IngestionOptions, Itemset, ProbabilityModel, cell_probability,
                  empirical_model, load_dataset, user_model)

from conftest import make_dataset


class TestLoadDataset:
    def test_first_appearance_encoding(self, toy_table):
        assert toy_table.level_counts == (2, 2)
        assert toy_table.codes.tolist() == [[1, 1], [2, 1], [1, 2]]

    def test_degenerate_single_cell(self):
        ds = load_dataset([["a"]], IngestionOptions(header=False))
        assert ds.level_counts == (1,)
        assert ds.codes.tolist() == [[1]]

    def test_ragged_raises(self):
        with pytest.raises(IngestionError, match="ragged"):
            load_dataset([["a", "b"], ["c"]], IngestionOptions(header=False))

    def test_all_rows_missing_raises(self):
        with pytest.raises(EmptyDatasetError):
            load_dataset([["?", "a"], ["b", ""]], IngestionOptions(header=False))

    def test_missing_drop_counts_dropped(self):
        ds = load_dataset([["a", "x"], ["?", "x"], ["b", "y"]],
                          IngestionOptions(header=False))
        assert ds.n == 2
        assert ds.dropped_rows == 1

    def test_missing_as_level(self):
        ds = load_dataset([["a"], ["?"], ["a"]],
                          IngestionOptions(header=False, missing_policy="level"))
        assert ds.n == 3
        assert ds.level_counts == (2,)
        assert ds.level_labels[0] == ("a", "?")

    def test_lexicographic_order(self):
        ds = load_dataset([["b"], ["a"]],
                          IngestionOptions(header=False, level_order="lexicographic"))
        assert ds.level_labels[0] == ("a", "b")
        assert ds.codes.tolist() == [[2], [1]]

    def test_header_and_drop_cols(self):
        ds = load_dataset([["id", "color"], ["1", "red"], ["2", "blue"]],
                          IngestionOptions(drop_cols=("id",)))
        assert ds.variable_names == ("color",)
        assert ds.level_counts == (2,)

    def test_exact_string_matching(self):
        # no whitespace/case normalization: "A" and "a " are distinct levels
        ds = load_dataset([["A"], ["a "], ["A"]], IngestionOptions(header=False))
        assert ds.level_counts == (2,)

    def test_duplicate_names_raise(self):
        with pytest.raises(IngestionError, match="unique"):
            load_dataset([["x", "x"], ["a", "b"]], IngestionOptions())


class TestEmpiricalModel:
    def test_direct_frequency(self):
        ds = make_dataset([[1], [1], [2]])
        model = empirical_model(ds)
        assert model.pi[0].tolist() == pytest.approx([2 / 3, 1 / 3])
        assert model.source == "empirical"

    def test_single_level(self):
        ds = make_dataset([[1]] * 5, level_counts=(1,))
        model = empirical_model(ds)
        assert model.pi[0].tolist() == [1.0]

    def test_matches_independent_counter(self):
        rng = np.random.default_rng(3)
        codes = rng.integers(1, 4, size=(200, 4))
        ds = make_dataset(codes, level_counts=(3, 3, 3, 3))
        model = empirical_model(ds)
        # independent one-pass counter
        for j in range(4):
            counts = {}
            for i in range(200):
                counts[codes[i, j]] = counts.get(codes[i, j], 0) + 1
            for level in (1, 2, 3):
                assert model.pi[j][level - 1] == counts.get(level, 0) / 200

    def test_counts_recover_n_exactly(self):
        rng = np.random.default_rng(4)
        ds = make_dataset(rng.integers(1, 3, size=(49, 2)), level_counts=(2, 2))
        model = empirical_model(ds)
        for j in range(2):
            counts = [round(float(q) * 49) for q in model.pi[j]]
            assert sum(counts) == 49


class TestProbabilityModel:
    def test_rejects_bad_sum(self):
        with pytest.raises(DomainError, match="sum"):
            ProbabilityModel(pi=(np.array([0.5, 0.4]),), source="user")

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            ProbabilityModel(pi=(np.array([-0.1, 1.1]),), source="user")


class TestCellProbability:
    def test_product_of_two(self):
        model = ProbabilityModel(
            pi=(np.array([0.5, 0.5]), np.array([0.2, 0.8])), source="user")
        d = Itemset.of((0, 1), (1, 2))
        assert cell_probability(model, d) == pytest.approx(0.4)

    def test_identity_single(self):
        model = ProbabilityModel(pi=(np.array([0.3, 0.7]),), source="user")
        assert cell_probability(model, Itemset.of((0, 2))) == pytest.approx(0.7)

    def test_out_of_range_level(self):
        model = ProbabilityModel(pi=(np.array([0.3, 0.7]),), source="user")
        with pytest.raises(DomainError):
            cell_probability(model, Itemset.of((0, 3)))

    def test_full_cells_sum_to_one(self):
        import itertools
        rng = np.random.default_rng(11)
        pi = tuple(rng.dirichlet(np.ones(l)) for l in (2, 3, 2, 4))
        model = ProbabilityModel(pi=pi, source="user")
        total = 0.0
        for cell in itertools.product(*(range(1, l + 1) for l in (2, 3, 2, 4))):
            total += cell_probability(
                model, Itemset(tuple(zip(range(4), cell))))
        assert total == pytest.approx(1.0, abs=1e-10)


class TestItemset:
    def test_canonical_sorting(self):
        assert Itemset.of((2, 1), (0, 3)).entries == ((0, 3), (2, 1))

    def test_equality_is_canonical(self):
        assert Itemset.of((1, 2), (3, 1)) == Itemset.of((3, 1), (1, 2))

    def test_duplicate_variable_rejected(self):
        with pytest.raises(DomainError):
            Itemset(((1, 1), (1, 2)))

    def test_contains(self):
        big = Itemset.of((0, 1), (1, 2), (3, 1))
        assert big.contains(Itemset.of((1, 2)))
        assert not big.contains(Itemset.of((1, 1)))


class TestUserModel:
    def test_fallback_to_empirical(self, toy_table):
        ds, model = user_model(toy_table, {"V1": {"a": 0.9, "b": 0.1}})
        assert model.pi[0].tolist() == [0.9, 0.1]
        assert model.pi[1].tolist() == pytest.approx([2 / 3, 1 / 3])
        assert model.source == "user"

    def test_unseen_level_extends_vocabulary(self, toy_table):
        ds, model = user_model(
            toy_table, {"V1": {"a": 0.5, "b": 0.3, "c": 0.2}})
        assert ds.level_counts == (3, 2)
        assert ds.level_labels[0] == ("a", "b", "c")
        assert model.pi[0].tolist() == [0.5, 0.3, 0.2]
        # codes untouched: unseen level never occurs in rows
        assert ds.codes[:, 0].max() == 2

    def test_missing_observed_label_rejected(self, toy_table):
        with pytest.raises(DomainError, match="misses"):
            user_model(toy_table, {"V1": {"a": 1.0}})

    def test_unknown_variable_rejected(self, toy_table):
        with pytest.raises(DomainError, match="unknown"):
            user_model(toy_table, {"nope": {"a": 1.0}})


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.text(alphabet="abcXY ?", min_size=1, max_size=3),
                         min_size=2, max_size=4),
                min_size=1, max_size=12))
def test_encoding_round_trip(raw):
    width = len(raw[0])
    rows = [r[:width] + ["z"] * (width - len(r)) for r in raw]
    opts = IngestionOptions(header=False, missing_markers=(), missing_policy="drop")
    ds = load_dataset(rows, opts)
    decoded = [list(ds.decode_row(i)) for i in range(ds.n)]
    assert decoded == rows
