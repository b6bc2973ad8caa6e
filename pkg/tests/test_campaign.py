import json
from datetime import datetime, timezone
from fractions import Fraction

import pytest
import yaml

from appraisal360.campaign import (
    config_to_dict,
    dump_campaign_config,
    evaluate_responses,
    load_campaign_config,
    parse_responses,
    read_results,
    result_to_record,
    results_filename,
    validate_campaign,
    write_results,
)
from appraisal360.errors import AppraisalError
from appraisal360.fuzzy import NormalizationMode

from conftest import full_rows, write_responses


def write_config(path, data):
    path.write_text(yaml.safe_dump(data, allow_unicode=True), encoding="utf-8")
    return path


class TestLoadConfig:
    def test_shipped_default(self, config):
        assert len(config.scale) == 5
        assert len(config.aspects) == 4
        assert len(config.roles) == 4
        assert len(config.bands) == 4
        assert [a.mark for a in config.aspects] == [50, 25, 20, 5]
        assert [(r.name, r.mark) for r in config.roles] == [
            ("superior", 50),
            ("peer", 25),
            ("student", 20),
            ("self", 5),
        ]
        assert config.aspect("working_output").weights.tolist() == [0.2, 0.3, 0.3, 0.2]
        assert config.aspect("knowledge_skills").weights.tolist() == [0.25] * 4

    def test_minimal_config_gets_defaults(self, tmp_path, config):
        loaded = load_campaign_config(write_config(tmp_path / "c.yaml", {"campaign_id": "x"}))
        assert loaded.bands == config.bands
        assert loaded.scale == config.scale

    def test_omitted_bands_are_injected(self, tmp_path, config):
        data = config_to_dict(config)
        del data["bands"]
        loaded = load_campaign_config(write_config(tmp_path / "c.yaml", data))
        assert [b.group_label for b in loaded.bands] == ["Group IV", "Group III", "Group II", "Group I"]

    def test_band_gap(self, tmp_path):
        data = {
            "campaign_id": "x",
            "bands": [
                {"group": "low", "lower": 0, "upper": 50},
                {"group": "high", "lower": 60, "upper": 100},
            ],
        }
        with pytest.raises(AppraisalError) as exc:
            load_campaign_config(write_config(tmp_path / "c.yaml", data))
        assert exc.value.code == "E_BAND_GAP"

    def test_band_overlap(self, tmp_path):
        data = {
            "campaign_id": "x",
            "bands": [
                {"group": "low", "lower": 0, "upper": 70},
                {"group": "high", "lower": 60, "upper": None},
            ],
        }
        with pytest.raises(AppraisalError) as exc:
            load_campaign_config(write_config(tmp_path / "c.yaml", data))
        assert exc.value.code == "E_BAND_OVERLAP"

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("campaign_id: [unclosed\n")
        with pytest.raises(AppraisalError) as exc:
            load_campaign_config(path)
        assert exc.value.code == "E_PARSE"

    @pytest.mark.parametrize(
        "data",
        [
            {},
            ["not", "a", "mapping"],
            {"campaign_id": "x", "source_roles": [{"name": "boss", "mark": "fifty"}]},
            {"campaign_id": "x", "source_roles": [{"name": "boss", "mark": "0,5"}]},
            {"campaign_id": "x", "normalization": "sometimes"},
            {"campaign_id": "x", "aspects": [{"id": "a", "mark": 10, "factors": [{"id": "f"}], "weights": [0.5, 0.5]}]},
            {"campaign_id": "x", "aspects": [{"id": "a", "mark": 10, "factors": [{"id": "f"}], "weights": [1.5]}]},
        ],
    )
    def test_schema_errors(self, tmp_path, data):
        with pytest.raises(AppraisalError) as exc:
            load_campaign_config(write_config(tmp_path / "c.yaml", data))
        assert exc.value.code == "E_SCHEMA"

    def test_round_trip(self, tmp_path, config):
        path = tmp_path / "out.yaml"
        dump_campaign_config(config, path)
        assert load_campaign_config(path) == config

    def test_round_trip_custom(self, tmp_path):
        data = {
            "campaign_id": "three",
            "normalization": "strict",
            "aspects": [
                {"id": "a", "label": "A", "mark": 60, "factors": [{"id": "x"}, {"id": "y"}, {"id": "z"}]},
                {"id": "b", "label": "B", "mark": 30, "weights": [1.0], "factors": [{"id": "x"}]},
                {"id": "c", "label": "C", "mark": 10, "weights": [0.7, 0.3], "factors": [{"id": "x"}, {"id": "y"}]},
            ],
        }
        cfg = load_campaign_config(write_config(tmp_path / "c.yaml", data))
        assert cfg.aspect("a").weights.tolist() == [1 / 3] * 3
        dump_campaign_config(cfg, tmp_path / "again.yaml")
        assert load_campaign_config(tmp_path / "again.yaml") == cfg


class TestParseResponses:
    def test_forty_rows(self, tmp_path, config):
        rows = [[f"r{n}", "peer", "S1", "working_output", f"f{k}", 7] for n in range(10) for k in range(1, 5)]
        rs = parse_responses(write_responses(tmp_path / "r.csv", rows), config)
        assert len(rs.responses) == 40
        assert rs.responses[0].row == 2
        assert rs.campaign_id == config.campaign_id

    def test_score_out_of_range_names_row(self, tmp_path, config):
        rows = [["r1", "peer", "S1", "working_output", "f1", 7], ["r2", "peer", "S1", "working_output", "f1", 11]]
        with pytest.raises(AppraisalError) as exc:
            parse_responses(write_responses(tmp_path / "r.csv", rows), config)
        assert exc.value.code == "E_SCORE_RANGE"
        assert exc.value.location == "row 3"

    @pytest.mark.parametrize(
        "row",
        [
            ["r1", "peer", "S1", "working_output", "f9", 7],
            ["r1", "peer", "S1", "no_such_aspect", "f1", 7],
            ["r1", "customer", "S1", "working_output", "f1", 7],
        ],
    )
    def test_unknown_ids(self, tmp_path, config, row):
        with pytest.raises(AppraisalError) as exc:
            parse_responses(write_responses(tmp_path / "r.csv", [row]), config)
        assert exc.value.code == "E_UNKNOWN_ID"

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "rater,role,subject,aspect,factor,score\n",
            "rater_id,source_role,subject_id,aspect_id,factor_id,score\nr1,peer,S1,working_output,f1\n",
            "rater_id,source_role,subject_id,aspect_id,factor_id,score\nr1,peer,S1,working_output,f1,7.5\n",
            "rater_id,source_role,subject_id,aspect_id,factor_id,score\n,peer,S1,working_output,f1,7\n",
        ],
    )
    def test_parse_errors(self, tmp_path, config, text):
        path = tmp_path / "r.csv"
        path.write_text(text, encoding="utf-8")
        with pytest.raises(AppraisalError) as exc:
            parse_responses(path, config)
        assert exc.value.code == "E_PARSE"

    def test_crlf_and_bom(self, tmp_path, config):
        text = "\ufeffrater_id,source_role,subject_id,aspect_id,factor_id,score\r\nr1,peer,S1,working_output,f1,7\r\n"
        path = tmp_path / "r.csv"
        path.write_bytes(text.encode("utf-8"))
        rs = parse_responses(path, config)
        assert rs.responses[0].score == 7

    def test_json_alternative(self, tmp_path, config):
        record = {
            "rater_id": "r1",
            "source_role": "self",
            "subject_id": "S1",
            "aspect_id": "contribution",
            "factor_id": "f2",
            "score": 4,
        }
        (tmp_path / "r.json").write_text(json.dumps([record]))
        (tmp_path / "r.jsonl").write_text(json.dumps(record) + "\n")
        (tmp_path / "r.csv").write_text(
            "rater_id,source_role,subject_id,aspect_id,factor_id,score\nr1,self,S1,contribution,f2,4\n"
        )
        parsed = [parse_responses(tmp_path / name, config).responses for name in ("r.json", "r.jsonl", "r.csv")]
        assert parsed[0] == parsed[1] == parsed[2]

    def test_same_bytes_same_result(self, tmp_path, config):
        path = write_responses(tmp_path / "r.csv", full_rows(config))
        assert parse_responses(path, config) == parse_responses(path, config)


class TestValidate:
    def test_complete(self, tmp_path, config):
        rows = full_rows(config, roles=("superior", "peer", "student", "self"))
        report = validate_campaign(config, parse_responses(write_responses(tmp_path / "r.csv", rows), config))
        assert report.ok
        assert report.errors == [] and report.warnings == []
        assert report.coverage[("S1", "working_output", "f1", "peer")] == 1

    def test_missing_factor(self, tmp_path, config):
        rows = [r for r in full_rows(config) if not (r[3] == "personal_quality" and r[4] == "f3")]
        report = validate_campaign(config, parse_responses(write_responses(tmp_path / "r.csv", rows), config))
        assert [(f.code, f.location) for f in report.errors] == [
            ("E_NO_RESPONSES", "subject=S1 aspect=personal_quality factor=f3")
        ]

    def test_role_absent_and_renormalized(self, tmp_path, config):
        # superior, peer, student each vote a different single grade; no self rows
        rows = []
        for role, score in (("superior", 10), ("peer", 8), ("student", 6)):
            rows += full_rows(config, score=score, roles=(role,))
        rs = parse_responses(write_responses(tmp_path / "r.csv", rows), config)
        report = validate_campaign(config, rs)
        assert report.ok
        assert [(f.code, f.location) for f in report.warnings] == [("W_ROLE_ABSENT", "subject=S1 role=self")]
        (result,) = evaluate_responses(config, rs)
        # the contribution aspect has uniform weights 0.25, which caps every component
        expected_row = [Fraction(50, 95), Fraction(25, 95), Fraction(20, 95), 0, 0]
        contribution = result.aspect_results[3]
        assert contribution.composed.tolist() == [float(min(Fraction(1, 4), x)) for x in expected_row]

    def test_duplicates_last_wins(self, tmp_path, config):
        rows = full_rows(config, score=10)
        rows.append(["superior0", "superior", "S1", "working_output", "f1", 2])
        rs = parse_responses(write_responses(tmp_path / "r.csv", rows), config)
        report = validate_campaign(config, rs)
        assert [f.code for f in report.warnings if f.code == "W_DUPLICATE"] == ["W_DUPLICATE"]
        (result,) = evaluate_responses(config, rs)
        # f1 row becomes [0,0,0,0,1]; min with weight 0.2 gives 0.2 in the last column
        assert result.aspect_results[0].composed.tolist() == [0.3, 0.0, 0.0, 0.0, 0.2]

    def test_zero_mark_role_only(self, tmp_path, config):
        data = config_to_dict(config)
        data["source_roles"].append({"name": "observer", "mark": 0})
        cfg = load_campaign_config(write_config(tmp_path / "c.yaml", data))
        rows = full_rows(cfg, roles=("observer",))
        report = validate_campaign(cfg, parse_responses(write_responses(tmp_path / "r.csv", rows), cfg))
        assert {f.code for f in report.errors} == {"E_NO_SOURCES"}

    def test_strict_weights(self, tmp_path, config):
        rs = parse_responses(write_responses(tmp_path / "r.csv", full_rows(config)), config)
        report = validate_campaign(config, rs, NormalizationMode.STRICT)
        assert not any(f.code == "W_NORMALIZATION" for f in report.warnings)
        data = config_to_dict(config)
        data["aspects"][0]["weights"] = [0.3, 0.4, 0.3, 0.3]
        cfg = load_campaign_config(write_config(tmp_path / "c.yaml", data))
        report = validate_campaign(cfg, rs, NormalizationMode.STRICT)
        assert [f.location for f in report.warnings if f.code == "W_NORMALIZATION"] == ["aspect=working_output"]

    def test_clean_report_never_fails_evaluation(self, tmp_path, config):
        rows = full_rows(config, roles=("peer", "self"), raters_per_role=3, score=5)
        rows += full_rows(config, subject="S2", roles=("student",), score=9)
        rs = parse_responses(write_responses(tmp_path / "r.csv", rows), config)
        assert validate_campaign(config, rs).ok
        assert [r.subject_id for r in evaluate_responses(config, rs)] == ["S1", "S2"]


class TestResults:
    def test_filename(self):
        when = datetime(2026, 1, 2, 3, 4, 5, 6, tzinfo=timezone.utc)
        assert results_filename("demo", when) == "demo-20260102T030405000006Z.results"

    def test_empty(self, tmp_path):
        path = tmp_path / "empty.results"
        write_results([], path)
        assert path.read_bytes() == b""

    def test_round_trip(self, tmp_path, replica_config, replica_paths):
        results = evaluate_responses(replica_config, parse_responses(replica_paths[1], replica_config))
        path = tmp_path / "out.results"
        write_results(results, path)
        text = path.read_text(encoding="utf-8")
        assert text.endswith("\n") and text.count("\n") == 1
        record = json.loads(text)
        assert list(record) == [
            "subject_id", "aspects", "opr", "opr_display", "group", "performer", "remarks",
        ]
        assert record["opr"] == 89 and record["opr_display"] == "89.00"
        assert record["group"] == "Group I"
        assert read_results(path) == results
        assert [result_to_record(r) for r in read_results(path)] == [record]

    def test_refuses_to_overwrite(self, tmp_path):
        path = tmp_path / "x.results"
        path.write_text("")
        with pytest.raises(AppraisalError) as exc:
            write_results([], path)
        assert exc.value.code == "E_IO"
