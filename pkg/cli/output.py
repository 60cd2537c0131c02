"""Fixed output names per command and report emission."""
import os
import logging

from core.serialization import write_csv, write_json

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3

# command -> (csv file, json summary file)
OUTPUT_FILES = {
    "validate-norm": ("violations.csv", "convexity_report.json"),
    "smooth": ("smoothing_report.csv", "smoothing_summary.json"),
    "check-hilbert": ("hilbertianity.csv", "hilbertianity_summary.json"),
    "quotient": ("quotient_batch.csv", "quotient_summary.json"),
    "distances": ("distances.csv", "distances_summary.json"),
}


def output_paths(command: str, output_dir: str) -> tuple[str, str]:
    csv_name, json_name = OUTPUT_FILES[command]
    return os.path.join(output_dir, csv_name), os.path.join(output_dir, json_name)


def emit(command: str, output_dir: str, header: list, rows: list, summary: dict) -> tuple[str, str]:
    """Write the CSV and its JSON summary; both are renamed into place once complete."""
    csv_path, json_path = output_paths(command, output_dir)
    write_csv(csv_path, header, rows)
    write_json(json_path, summary)
    logger.info("wrote %s and %s", csv_path, json_path)
    return csv_path, json_path
