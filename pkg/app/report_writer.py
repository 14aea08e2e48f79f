"""Write solver reports as JSON and comparison results as CSV"""
import csv
import json
from pathlib import Path
from typing import Any, List, Optional, Union

from pydantic import BaseModel

from app.models import ComparisonReport


# Wall-clock fields vary run to run; dropped unless asked for
TIMING_FIELDS = {
    "SynthesisReport": {"iteration_seconds": True},
    "ComparisonReport": {"rows": {"__all__": {"mean_cpu_seconds"}}},
}


class ReportWriter:
    """Serialize reports; JSON output is byte-identical for identical inputs"""

    def __init__(self, include_timings: bool = False):
        self.include_timings = include_timings

    def to_dict(self, report: BaseModel) -> Any:
        exclude = None if self.include_timings else TIMING_FIELDS.get(type(report).__name__)
        return report.model_dump(mode="json", exclude=exclude)

    def to_json(self, report: Union[BaseModel, Any]) -> str:
        data = self.to_dict(report) if isinstance(report, BaseModel) else report
        # repr of a float is its shortest round-trip form
        return json.dumps(data, indent=2, sort_keys=False, ensure_ascii=False) + "\n"

    def write_json(self, report: Union[BaseModel, Any], output_path: str) -> str:
        """Write one report to a JSON file"""
        Path(output_path).parent.mkdir(parents=True, exist_ok=True)
        Path(output_path).write_text(self.to_json(report), encoding="utf-8")
        return output_path

    def comparison_rows(self, report: ComparisonReport) -> List[List[Any]]:
        rows = []
        for row in report.rows:
            rows.append([
                row.label if row.samples is None else row.samples,
                row.mean_cpu_seconds,
                row.mean_max_subopt_pct,
            ])
        return rows

    def export_comparison_csv(self, report: ComparisonReport, output_path: str):
        """s,mean_cpu_seconds,mean_max_subopt_pct; the continuous row is labelled"""
        Path(output_path).parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["s", "mean_cpu_seconds", "mean_max_subopt_pct"])
            writer.writerows(self.comparison_rows(report))

    def export_curves_csv(self, report: ComparisonReport, output_path: str):
        """Per-state R_star and mean R_s for every sample count"""
        Path(output_path).parent.mkdir(parents=True, exist_ok=True)
        keys = list(report.r_s_curves)
        with open(output_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["state", "R_star"] + [f"R_s{key}" for key in keys])
            for q, r_star in enumerate(report.r_star):
                writer.writerow([q, r_star] + [report.r_s_curves[key][q] for key in keys])

    def export_comparison(self, report: ComparisonReport, output_path: str,
                          curves_path: Optional[str] = None) -> List[str]:
        """Comparison CSV, curves CSV and JSON side by side"""
        base = Path(output_path)
        curves_path = curves_path or str(base.with_name(f"{base.stem}_curves.csv"))
        json_path = str(base.with_suffix(".json"))
        self.export_comparison_csv(report, output_path)
        self.export_curves_csv(report, curves_path)
        self.write_json(report, json_path)
        return [output_path, curves_path, json_path]
