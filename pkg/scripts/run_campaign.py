"""Run a campaign from a JSON config and print the table summary.

    python scripts/run_campaign.py scripts/quick_campaign.json
"""
import sys
from pathlib import Path

from heckelab.campaign import CampaignConfig, run_campaign
from heckelab.report import emit_report


def main(path: str) -> int:
    cfg = CampaignConfig.from_file(path).validate()
    report = run_campaign(cfg)
    if cfg.out:
        Path(cfg.out).write_bytes(emit_report(report, "json"))
        print(f"wrote {cfg.out}", file=sys.stderr)
    sys.stdout.write(emit_report(report, "table").decode())
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1] if len(sys.argv) > 1 else str(Path(__file__).with_name("default_campaign.json"))))
