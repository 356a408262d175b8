"""Write the synthetic 113-respondent Likert fixture used by the tests.

The raw survey data behind the published percentages is not public. This
fixture only pins two published marginals so the arithmetic can be
checked end to end: P1 has 97 agreeing respondents out of 113 (85.84%,
shown as 86%), and 78 of 113 respondents are male (69%). Everything else
is seeded noise.

    python scripts/make_survey_fixture.py tests/data/synthetic_survey.csv
"""

import csv
import random
import sys

from ismkit.factors import paper_catalog

N_RESPONDENTS = 113
P1_AGREE = 97
MALE = 78
SEED = 20230509


def main(path: str):
    rng = random.Random(SEED)
    respondents = [f"R{k:03d}" for k in range(1, N_RESPONDENTS + 1)]
    genders = ["male"] * MALE + ["female"] * (N_RESPONDENTS - MALE - 2) + ["undisclosed"] * 2
    rng.shuffle(genders)
    experience = [rng.choice(["0-2", "3-5", "6-10", "10+"]) for _ in respondents]
    items = [f.id for f in paper_catalog()]

    p1_agree = set(rng.sample(respondents, P1_AGREE))
    rows = []
    for r, g, e in zip(respondents, genders, experience):
        for item in items:
            if item == "P1":
                score = rng.choice([4, 5]) if r in p1_agree else rng.choice([1, 2, 3])
            else:
                score = rng.choices([1, 2, 3, 4, 5], weights=[4, 6, 10, 40, 40])[0]
            rows.append((r, item, score, g, e))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["respondent_id", "item_id", "score", "gender", "experience"])
        w.writerows(rows)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/synthetic_survey.csv")
