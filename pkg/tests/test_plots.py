from __future__ import annotations

from vaa_audit.plots import render_report_figures
from vaa_audit.simulate import AuditConfig, RosterSpec, generate_roster, run_audit

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _report(k_sweep=(3,)):
    roster = generate_roster(RosterSpec(8, 3, question_count=5, seed=4))
    config = AuditConfig(batches=2, users_per_batch=10, question_count=5,
                         delta_sweep=(1, 2), drop_sweep=(1, 2), k_sweep=k_sweep,
                         base_seed=2)
    return run_audit(config, roster)


def test_figures_are_rendered_as_png(tmp_path):
    paths = render_report_figures(_report(), tmp_path)
    assert set(paths) == {"single_candidate", "single_party", "drops",
                          "row_overall", "topk"}
    for name, path in paths.items():
        assert path.exists(), name
        assert path.read_bytes()[:8] == PNG_MAGIC
        assert path.name.startswith("audit_")
        assert path.suffix == ".png"


def test_figure_stem_is_configurable(tmp_path):
    paths = render_report_figures(_report(), tmp_path, stem="nightly")
    assert paths["drops"].name == "nightly_drops.png"


def test_topk_figure_skipped_without_topk_rows(tmp_path):
    report = _report()
    stripped = type(report)(change_rates=report.change_rates, topk=(),
                            provenance=report.provenance)
    paths = render_report_figures(stripped, tmp_path)
    assert "topk" not in paths
    assert not (tmp_path / "audit_topk.png").exists()
