#!/usr/bin/env python3
# Irregularity Profiler - Reproduction Runner
# Perfila as séries GBP/USD e JPY/USD, elege o dataset primário e imprime a
# tabela de sensibilidade (regra de quantil x fence_k) usada no REPRODUCTION.md

import argparse
import json
import subprocess
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List

PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from irregularity.ingest import IngestSpec, ingest  # noqa: E402
from irregularity.outliers import fence_sweep  # noqa: E402

DATASETS = {
    "GBP/USD": PROJECT_ROOT / "data" / "gbpusd_daily.csv",
    "JPY/USD": PROJECT_ROOT / "data" / "jpyusd_daily.csv",
}
FENCE_KS = (1.0, 1.5, 2.0, 3.0)


class ReproductionRunner:
    def __init__(self, data: Dict[str, Path], work_dir: Path):
        self.data = data
        self.work_dir = work_dir
        self.bank = work_dir / "bank.json"
        self.results: Dict[str, Any] = {}
        self.start_time = time.time()

    def log(self, message: str, level: str = "INFO"):
        timestamp = datetime.now().strftime("%H:%M:%S")
        print(f"[{timestamp}] {level}: {message}", file=sys.stderr)

    def run_command(self, args: List[str], name: str, timeout: int = 300) -> Dict[str, Any]:
        self.log(f"Executando: {name}")
        cmd = [sys.executable, "-m", "irregularity", "--log-level", "WARNING", *args]

        try:
            start_time = time.time()
            result = subprocess.run(cmd, cwd=PROJECT_ROOT, capture_output=True, text=True, timeout=timeout)
            duration = time.time() - start_time
        except subprocess.TimeoutExpired:
            self.log(f"{name} expirou após {timeout}s", "ERROR")
            return {"name": name, "success": False, "duration": timeout, "error": "Timeout"}

        success = result.returncode == 0
        if success:
            self.log(f"{name} concluído em {duration:.1f}s")
        else:
            self.log(f"{name} falhou (exit {result.returncode}): {result.stderr.strip()}", "ERROR")

        return {
            "name": name,
            "success": success,
            "duration": duration,
            "stdout": result.stdout,
            "return_code": result.returncode,
        }

    def check_inputs(self) -> bool:
        missing = [str(path) for path in self.data.values() if not path.is_file()]
        for path in missing:
            self.log(f"Série ausente: {path}", "ERROR")
        return not missing

    def run_profiles(self) -> Dict[str, Any]:
        self.log("=== PERFIL DE IRREGULARIDADE ===")
        args = ["profile", "--bank", str(self.bank), "--ts-col", "date", "--value-col", "rate"]
        for dataset_id, path in self.data.items():
            args += ["--input", str(path), "--dataset-id", dataset_id]

        result = self.run_command(args, "profile")
        if result["success"]:
            result["profiles"] = {p["dataset_id"]: p for p in json.loads(result["stdout"])}
        return result

    def run_ranking(self) -> Dict[str, Any]:
        self.log("=== RANKING DO BANCO ===")
        rankings = {}
        for key in ("outlier_count", "outlier_fraction"):
            result = self.run_command(["rank", "--bank", str(self.bank), "--key", key], f"rank ({key})")
            if result["success"]:
                rankings[key] = json.loads(result["stdout"])
        return rankings

    def run_sensitivity(self) -> Dict[str, List[Dict[str, Any]]]:
        self.log("=== SENSIBILIDADE (REGRA x FENCE_K) ===")
        sweeps = {}
        for dataset_id, path in self.data.items():
            series, _ = ingest(IngestSpec(path=path, timestamp_column="date", value_column="rate", dataset_id=dataset_id))
            sweeps[dataset_id] = [row.model_dump(mode="json") for row in fence_sweep(series, FENCE_KS)]
        return sweeps

    def render_table(self) -> str:
        lines = ["| dataset | n | regra | k | outliers | fração |", "|---|---|---|---|---|---|"]
        profiles = self.results.get("profile", {}).get("profiles", {})
        for dataset_id, rows in self.results.get("sensitivity", {}).items():
            n = profiles.get(dataset_id, {}).get("n", "?")
            for row in rows:
                lines.append(
                    f"| {dataset_id} | {n} | {row['quantile_rule']} | {row['fence_k']} "
                    f"| {row['outlier_count']} | {row['outlier_fraction']:.5f} |"
                )
        return "\n".join(lines) + "\n"

    def run(self) -> int:
        if not self.check_inputs():
            return 1
        self.work_dir.mkdir(parents=True, exist_ok=True)

        self.results["profile"] = self.run_profiles()
        if not self.results["profile"]["success"]:
            return 1
        self.results["ranking"] = self.run_ranking()
        self.results["sensitivity"] = self.run_sensitivity()

        for key, ranking in self.results["ranking"].items():
            self.log(f"Primário por {key}: {ranking['primary']} (validação: {ranking['validation']})")
        self.log(f"Tempo total: {time.time() - self.start_time:.1f}s")

        print(self.render_table(), end="")
        return 0


def main():
    parser = argparse.ArgumentParser(description="Reprodução das contagens de irregularidade GBP/USD e JPY/USD")
    parser.add_argument("--gbp", type=Path, default=DATASETS["GBP/USD"], help="CSV diário GBP/USD (date,rate)")
    parser.add_argument("--jpy", type=Path, default=DATASETS["JPY/USD"], help="CSV diário JPY/USD (date,rate)")
    parser.add_argument("--work-dir", type=Path, default=PROJECT_ROOT / "reports", help="Diretório do catálogo")
    args = parser.parse_args()

    runner = ReproductionRunner({"GBP/USD": args.gbp, "JPY/USD": args.jpy}, args.work_dir)
    sys.exit(runner.run())


if __name__ == "__main__":
    main()
