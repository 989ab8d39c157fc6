"""Harness: seed derivation, ingestion, config handling, the sweep runner,
and result emission round trips."""

import json

import numpy as np
import pytest

from spilltest.errors import InvalidSpec, LengthMismatch, ParseError
from spilltest.generators import ErdosRenyiSpec, SmallWorldSpec, gen_erdos_renyi_gnp
from spilltest.harness import (
    ASSIGNMENT_STREAM,
    GRAPH_STREAM,
    NOISE_STREAM,
    NULL_SAMPLER_STREAM,
    RejectionRateTable,
    SimulationConfig,
    config_from_flat,
    derive_replicate_seed,
    emit_results,
    parse_results,
    read_edge_list_with_ids,
    read_treatment_outcome_csv,
    run_simulation,
    run_single_test,
)
from spilltest.outcomes import OutcomeParams, outcome_proportion


class TestSeedDerivation:
    def test_deterministic(self):
        a = derive_replicate_seed(42, 7, GRAPH_STREAM)
        b = derive_replicate_seed(42, 7, GRAPH_STREAM)
        assert a == b

    def test_streams_differ(self):
        seeds = {
            derive_replicate_seed(42, 7, tag)
            for tag in (GRAPH_STREAM, ASSIGNMENT_STREAM, NOISE_STREAM, NULL_SAMPLER_STREAM)
        }
        assert len(seeds) == 4

    def test_no_collisions_across_replicates(self):
        seen = set()
        for rep in range(1_000_000):
            seen.add(derive_replicate_seed(1, rep, GRAPH_STREAM))
        assert len(seen) == 1_000_000

    def test_master_seed_matters(self):
        assert derive_replicate_seed(1, 0, GRAPH_STREAM) != derive_replicate_seed(2, 0, GRAPH_STREAM)


def write_fixture(tmp_path, n=40, p=0.15, n_t=12, tau_spill=0.0, seed=5, ids=None):
    rng = np.random.default_rng(seed)
    g = gen_erdos_renyi_gnp(n, p, rng)
    z = np.zeros(n, dtype=np.int8)
    z[rng.choice(n, size=n_t, replace=False)] = 1
    y = outcome_proportion(g, z, OutcomeParams(1.0, tau_spill, 0.0, 1.0), rng)
    ids = ids or [f"u{k}" for k in range(n)]
    edge_path = tmp_path / "net.edgelist"
    with open(edge_path, "w") as fh:
        fh.write(f"{n}\n")
        for i, j in g.edges():
            fh.write(f"{ids[i]} {ids[j]}\n")
    data_path = tmp_path / "units.csv"
    with open(data_path, "w") as fh:
        fh.write("id,z,y\n")
        for k in range(n):
            fh.write(f"{ids[k]},{z[k]},{float(y[k])!r}\n")
    return edge_path, data_path, g, z, y


class TestIngestion:
    def test_round_trip_with_string_ids(self, tmp_path):
        edge_path, data_path, g, z, y = write_fixture(tmp_path)
        ids, z2, y2 = read_treatment_outcome_csv(data_path)
        assert z2.tolist() == z.tolist()
        assert np.allclose(y2, y)
        g2 = read_edge_list_with_ids(edge_path, {u: k for k, u in enumerate(ids)})
        assert g2 == g

    def test_integer_indices_accepted(self, tmp_path):
        edge_path, data_path, g, _, _ = write_fixture(tmp_path, ids=[str(k) for k in range(40)])
        ids, _, _ = read_treatment_outcome_csv(data_path)
        g2 = read_edge_list_with_ids(edge_path, {u: k for k, u in enumerate(ids)})
        assert g2 == g

    def test_non_binary_treatment_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,z,y\na,0,1.0\nb,2,0.5\n")
        with pytest.raises(ParseError) as err:
            read_treatment_outcome_csv(path)
        assert err.value.line_no == 3

    def test_non_numeric_outcome_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,z,y\na,0,x\n")
        with pytest.raises(ParseError):
            read_treatment_outcome_csv(path)

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,z,y\na,0,1.0\na,1,0.5\n")
        with pytest.raises(ParseError):
            read_treatment_outcome_csv(path)

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,treat,y\na,0,1.0\n")
        with pytest.raises(ParseError):
            read_treatment_outcome_csv(path)

    def test_vertex_count_mismatch(self, tmp_path):
        path = tmp_path / "net.edgelist"
        path.write_text("3\n0 1\n")
        with pytest.raises(LengthMismatch):
            read_edge_list_with_ids(path, {"a": 0, "b": 1})

    def test_unknown_id_rejected(self, tmp_path):
        path = tmp_path / "net.edgelist"
        path.write_text("2\na zz\n")
        with pytest.raises(ParseError) as err:
            read_edge_list_with_ids(path, {"a": 0, "b": 1})
        assert err.value.line_no == 2


class TestRunSingleTest:
    def test_null_data_gives_valid_pvalue(self, tmp_path):
        edge_path, data_path, *_ = write_fixture(tmp_path)
        report = run_single_test(edge_path, data_path, stat="tbond",
                                 null_class="degseq", n_samples=200, master_seed=9)
        assert 0.0 <= report.p_value <= 1.0
        assert report.n_draws == 200
        assert report.seed_info["master_seed"] == 9

    def test_planted_spillover_detected(self, tmp_path):
        edge_path, data_path, *_ = write_fixture(tmp_path, n=80, n_t=30, tau_spill=4.0)
        report = run_single_test(edge_path, data_path, stat="tquant",
                                 null_class="degseq", n_samples=300, master_seed=9)
        assert report.p_value < 0.05

    def test_m_one_zero_step_chain(self, tmp_path):
        edge_path, data_path, *_ = write_fixture(tmp_path)
        report = run_single_test(edge_path, data_path, stat="tbond", null_class="degseq",
                                 n_samples=1, burn_in_mult=0.0, thin_mult=0.0)
        assert report.p_value == 0.0
        assert report.n_ties == 1

    def test_reproducible_given_seed(self, tmp_path):
        edge_path, data_path, *_ = write_fixture(tmp_path)
        a = run_single_test(edge_path, data_path, n_samples=100, master_seed=4)
        b = run_single_test(edge_path, data_path, n_samples=100, master_seed=4)
        assert a.p_value == b.p_value
        assert a.null_draws == b.null_draws


SMALL_FLAT = {
    "network": "er", "n": 24, "er_p": 0.2, "design": "cre", "n_treated": 8,
    "outcome": "proportion", "tau_direct": [0.0], "tau_spill": [0.0],
    "stats": ["tbond"], "null_class": "iso", "samples": 20, "reps": 10,
    "alpha": 0.05, "seed": 3,
}


class TestConfig:
    def test_flat_round_trip(self):
        cfg = config_from_flat(SMALL_FLAT)
        assert cfg == SimulationConfig.from_dict(cfg.to_dict())

    def test_validation(self):
        with pytest.raises(InvalidSpec):
            config_from_flat({**SMALL_FLAT, "null_class": "bogus"})
        with pytest.raises(InvalidSpec):
            config_from_flat({**SMALL_FLAT, "stats": ["nope"]})
        with pytest.raises(InvalidSpec):
            config_from_flat({**SMALL_FLAT, "reps": 0})
        with pytest.raises(InvalidSpec):
            # 'er' null class needs an ER network with known p
            config_from_flat({**SMALL_FLAT, "network": "smallworld", "sw_k": 4,
                              "null_class": "er"})

    def test_sbm_from_flat(self):
        cfg = config_from_flat({
            **SMALL_FLAT, "network": "sbm",
            "sbm_block_sizes": [10, 14],
            "sbm_pref_diag": [0.5, 0.4], "sbm_pref_offdiag": 0.1,
        })
        nw = cfg.networks[0]
        assert nw.n == 24
        assert nw.pref_matrix[0][1] == 0.1


class TestRunSimulation:
    def test_table_one_shaped_sweep_row_count(self):
        cfg = SimulationConfig(
            networks=(SmallWorldSpec(20, 4, 0.1), ErdosRenyiSpec(20, p=0.2)),
            design=config_from_flat(SMALL_FLAT).design,
            outcome_model="proportion",
            tau_direct=(0.0, 4.0), tau_spill=(0.0, 0.4), beta_deg=(0.0,),
            noise_sd=1.0, stats=("tbond", "tquant"), null_class="iso",
            n_samples=10, n_replicates=4, alpha=0.05, estimator="raw",
            burn_in_mult=100.0, thin_mult=10.0, master_seed=1,
        )
        table = run_simulation(cfg)
        assert len(table.rows) == 16  # 2 networks x 4 effect pairs x 2 stats
        for row in table.rows:
            assert row.status == "ok"
            for p in row.p_values:
                assert p is None or 0.0 <= p <= 1.0
            assert row.rate == row.n_rejections / row.n_replicates

    def test_alpha_one_rejects_everything(self):
        cfg = config_from_flat({**SMALL_FLAT, "alpha": 1.0})
        table = run_simulation(cfg)
        assert all(row.rate == 1.0 for row in table.rows)

    def test_threads_do_not_change_results(self):
        cfg = config_from_flat({**SMALL_FLAT, "reps": 12})
        a = run_simulation(cfg, threads=1)
        b = run_simulation(cfg, threads=2)
        assert a.to_dict() == b.to_dict()

    def test_config_echo_is_reconstructable(self):
        cfg = config_from_flat(SMALL_FLAT)
        table = run_simulation(cfg)
        assert SimulationConfig.from_dict(table.config) == cfg


class TestEmission:
    def test_empty_table_header_only_csv(self, tmp_path):
        table = RejectionRateTable(config={}, master_seed=0, tool_version="x", rows=[])
        out = tmp_path / "empty.csv"
        emit_results(table, "csv", out)
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("network,design,")

    def test_json_round_trip(self, tmp_path):
        cfg = config_from_flat(SMALL_FLAT)
        table = run_simulation(cfg)
        out = tmp_path / "results.json"
        emit_results(table, "json", out)
        back = parse_results(out)
        assert back.to_dict() == table.to_dict()

    def test_csv_has_one_row_per_cell(self, tmp_path):
        cfg = config_from_flat({**SMALL_FLAT, "tau_spill": [0.0, 1.0]})
        table = run_simulation(cfg)
        out = tmp_path / "results.csv"
        emit_results(table, "csv", out)
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1 + len(table.rows)

    def test_unknown_format(self, tmp_path):
        table = RejectionRateTable(config={}, master_seed=0, tool_version="x", rows=[])
        with pytest.raises(ValueError):
            emit_results(table, "parquet", tmp_path / "x")
