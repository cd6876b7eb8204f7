# Irregularity Profiler - Contract Tests
# Cada documento JSON emitido pela CLI validado contra os schemas versionados

import json

import pytest
import yaml
from jsonschema import Draft202012Validator

from irregularity.main import run
from tests.conftest import CONTRACTS_PATH, series_csv_text

pytestmark = pytest.mark.contracts

FIXED_PEAKS = ["--delta", "0.5", "--lookahead", "5"]


@pytest.fixture(scope="module")
def contracts():
    with open(CONTRACTS_PATH, encoding="utf-8") as handle:
        return yaml.safe_load(handle)


@pytest.fixture
def validate(contracts):
    """Valida ``document`` contra o schema nomeado, com $defs resolvidos"""

    def _validate(document, name):
        schema = {"$defs": contracts["schemas"], "$ref": f"#/$defs/{name}"}
        Draft202012Validator(schema).validate(document)

    return _validate


def _run_json(capsys, argv, expected_code=0):
    assert run(argv) == expected_code
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def bank(spiky_csv, tmp_path, capsys):
    path = tmp_path / "bank.json"
    argv = ["profile", "--bank", str(path), *FIXED_PEAKS]
    for name, spikes in (("a", 1), ("b", 9)):
        argv += ["--input", str(spiky_csv(f"{name}.csv", spikes)), "--dataset-id", name]
    assert run(argv) == 0
    capsys.readouterr()
    return path


class TestSchemas:
    """Os próprios schemas"""

    def test_every_schema_is_valid(self, contracts):
        for name, schema in contracts["schemas"].items():
            Draft202012Validator.check_schema(schema)

    def test_contract_version_matches_catalog(self, contracts):
        assert contracts["version"] == "bank-v1"


class TestCommandOutputs:
    """Saída de cada comando"""

    def test_ingest(self, validate, write_csv, capsys):
        path = write_csv("gap.csv", "date,rate\n2001-03-05,1.0\n2001-03-06,\n2001-03-07,2.0\n")
        validate(_run_json(capsys, ["ingest", "--input", str(path)]), "IngestOutput")

    def test_profile_fixed(self, validate, spiky_csv, capsys):
        document = _run_json(capsys, ["profile", "--input", str(spiky_csv("s.csv", 3)), *FIXED_PEAKS])
        validate(document, "IrregularityProfile")

    def test_profile_tuned_list(self, validate, spiky_csv, capsys):
        argv = ["profile", "--delta", "0.5", "--input", str(spiky_csv("a.csv", 2)), "--input", str(spiky_csv("b.csv", 0))]
        validate(_run_json(capsys, argv), "ProfileList")

    def test_profile_of_constant_series(self, validate, write_csv, capsys):
        path = write_csv("flat.csv", series_csv_text([2.0] * 30))
        validate(_run_json(capsys, ["profile", "--input", str(path), "--lookahead", "3"]), "IrregularityProfile")

    def test_peaks(self, validate, spiky_csv, capsys):
        validate(_run_json(capsys, ["peaks", "--input", str(spiky_csv("s.csv", 0))]), "IppdResult")

    def test_rank(self, validate, bank, capsys):
        validate(_run_json(capsys, ["rank", "--bank", str(bank)]), "RankOutput")

    def test_report(self, validate, bank, capsys):
        validate(_run_json(capsys, ["report", "--bank", str(bank)]), "ReportOutput")

    def test_catalog_file(self, validate, bank):
        validate(json.loads(bank.read_text(encoding="utf-8")), "BankCatalog")

    def test_evaluate_single(self, validate, write_csv, capsys):
        actuals = write_csv("y.csv", series_csv_text([1, 2, 3, 5]))
        predictions = write_csv("p.csv", series_csv_text([1, 2, 4, 4]))

        argv = ["evaluate", "--actuals", str(actuals), "--predictions", str(predictions), "--param-count", "10", "--exec-time", "0.5"]
        validate(_run_json(capsys, argv), "EvalReport")

    def test_evaluate_undefined_r2(self, validate, write_csv, capsys):
        actuals = write_csv("y.csv", series_csv_text([3, 3, 3]))
        predictions = write_csv("p.csv", series_csv_text([1, 2, 4]))

        document = _run_json(capsys, ["evaluate", "--actuals", str(actuals), "--predictions", str(predictions)], 1)
        validate(document, "EvalReport")

    def test_evaluate_ranking(self, validate, write_csv, capsys):
        actuals = write_csv("y.csv", series_csv_text([1, 2, 3, 5]))
        first = write_csv("p1.csv", series_csv_text([1, 2, 4, 4]))
        second = write_csv("p2.csv", series_csv_text([0, 2, 3, 5]))

        argv = ["evaluate", "--actuals", str(actuals), "--predictions", str(first), "--predictions", str(second)]
        validate(_run_json(capsys, argv), "EvalRanking")


class TestSchemasRejectDrift:
    """Os schemas detectam campos faltantes ou extras"""

    def test_missing_field_rejected(self, validate, spiky_csv, capsys):
        from jsonschema import ValidationError

        document = _run_json(capsys, ["profile", "--input", str(spiky_csv("s.csv", 3)), *FIXED_PEAKS])
        del document["params_digest"]

        with pytest.raises(ValidationError):
            validate(document, "IrregularityProfile")

    def test_extra_field_rejected(self, validate, bank, capsys):
        from jsonschema import ValidationError

        document = _run_json(capsys, ["rank", "--bank", str(bank)])
        document["ranking"][0]["score"] = 1.0

        with pytest.raises(ValidationError):
            validate(document, "RankOutput")
