"""
TOOL_VERSION is written into every run manifest.
@type: str
"""
TOOL_VERSION = "1.0.0"


"""
MANIFEST_FILE is written next to the artifacts of every command:
{
    "command": "evaluate",
    "version": "1.0.0",
    "seed": 0,
    "inputs": {"listings.csv": "<sha256>"},
    "outputs": ["results.csv"],
    "settings": {...},
    "timestamp": "2024-01-01T00:00:00+00:00",
    "digest": "<sha256 of the manifest without timestamp and digest>"
}
@type: str
"""
MANIFEST_FILE = "manifest_{command}.json"


"""
@type: str
"""
PARSED_LISTINGS_FILE = "listings.csv"

"""
Listing counts, index links and per-field missing counts of a parse run.
@type: str
"""
PARSE_REPORT_FILE = "parse_report.json"

"""
Rejected rows and drop counts of a clean run.
@type: str
"""
CLEAN_REPORT_FILE = "clean_report.json"

"""
One cleaned dataset per year bucket, e.g. cleaned_2021-22.csv
@type: str
"""
CLEANED_FILE = "cleaned_{bucket}.csv"

"""
@type: str
"""
STATS_FILE = "stats.csv"

"""
@type: str
"""
CORR_FILE = "corr.csv"

"""
@type: str
"""
RESULTS_FILE = "results.csv"

"""
One fitted model per (family, bucket), e.g. models/gbt_2019.json
@type: str
"""
MODEL_FILE = "models/{family}_{bucket}.json"

"""
@type: str
"""
SHAP_FILE = "shap.csv"

"""
@type: str
"""
SHAP_SUMMARY_FILE = "shap_summary.csv"

"""
@type: str
"""
HEATMAP_FILE = "report/heatmap.svg"

"""
@type: str
"""
BEESWARM_FILE = "report/beeswarm_{bucket}.svg"

"""
@type: str
"""
SUMMARY_FILE = "report/summary.txt"
