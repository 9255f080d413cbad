"""Worked example of the metric taxonomy on recorded experiment counts.

The toolkit's accuracy is the share of true classifications among all
scored characters (rejections excluded from the denominator). Feeding in
a recorded 10,000-character run shows the arithmetic and the report
layout, including the sample-distribution table.
"""
from hwocr import EvalReport, render_report
from hwocr.evaluation import DatasetManifest, ManifestRow

# one recorded run: 8792 true, 1152 misclassified, 56 unsegmented
overall = EvalReport(true_count=8792, misclassified=1152, unsegmented=56, rejected=503)
print(f"true={overall.true_count} misclassified={overall.misclassified} "
      f"unsegmented={overall.unsegmented} -> accuracy {overall.accuracy:.2f}%")

system_wide = EvalReport(true_count=7839, misclassified=1065, unsegmented=1096, rejected=924)
print(f"system-wide run -> accuracy {system_wide.accuracy:.2f}% "
      f"(misses {system_wide.percentages()['misclassified']:.2f}%, "
      f"unsegmented {system_wide.percentages()['unsegmented']:.2f}%)")

distribution = [
    ("user-1", "train", 1185, 659, 137),
    ("user-1", "test", 442, 691, 120),
    ("user-2", "train", 1006, 529, 130),
    ("user-2", "test", 468, 718, 128),
    ("user-3", "train", 588, 525, 169),
    ("user-3", "test", 260, 944, 161),
]
rows = []
for user, split, isolated, freeflow, ff_words in distribution:
    rows.append(ManifestRow(user=user, split=split, dataset="Dataset-1", chars=isolated))
    rows.append(ManifestRow(user=user, split=split, dataset="Dataset-2", chars=freeflow, words=ff_words))
manifest = DatasetManifest(rows=tuple(rows))

per_user = {
    "user-1": {
        "Dataset-1": EvalReport(true_count=398, misclassified=17, unsegmented=2, rejected=27),
        "Dataset-2": EvalReport(true_count=550, misclassified=107, unsegmented=4, rejected=29),
    }
}
print()
print(render_report(per_user, manifest=manifest))
