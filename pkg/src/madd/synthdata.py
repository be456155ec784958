"""Synthetic scenario generation.

Produces fully populated, deterministic scenario files without touching any
real platform data: heavy-tailed follower and share counts, spiky
hour-of-day activity histograms, bland placeholder texts and a per-community
content catalog (one false claim plus one evidence-style and one
story-style correction). Useful for demos, tests and benchmarks.

Run as a module to write a scenario file:

    python -m madd.synthdata --users 689 --seed 7 --out scenario.json
"""

from __future__ import annotations

import argparse

import numpy as np

from . import rng as rngmod
from .content import ContentItem
from .evaluator import EvaluatorConfig
from .scenario import (
    HOURS_PER_DAY,
    Scenario,
    SimulationParams,
    UserRecord,
    make_scenario,
    save_scenario,
)

DEFAULT_COMMUNITIES = (
    "business",
    "education",
    "entertainment",
    "politics",
    "sports",
    "technology",
)

_TOPIC_NOUNS = {
    "business": "a listed company's quarterly filings",
    "education": "a national exam grading change",
    "entertainment": "an award ceremony's vote tally",
    "politics": "a committee's inquiry files",
    "sports": "a league's transfer deadline ruling",
    "technology": "a device safety recall notice",
}


def sample_share_counts(
    rng,
    n: int,
    alpha: float = 1.5,
    lam: float = 0.012,
    x_min: int = 10,
    bulk_fraction: float = 0.8,
):
    """Share totals: a low-activity bulk below x_min plus a truncated
    power-law tail, mirroring how real share counts concentrate near zero
    with a heavy upper tail."""
    hi = x_min
    while True:
        ks = np.arange(x_min, hi + 1, dtype=np.float64)
        w = ks**-alpha * np.exp(-lam * ks)
        tail = np.exp(-lam * (hi + 1)) * (hi + 1) ** -alpha / lam
        if tail < 1e-9 * w.sum():
            break
        hi *= 2
    probs = w / w.sum()
    tail_draws = rng.choice(ks.astype(np.int64), size=n, p=probs)
    bulk_draws = rng.integers(0, x_min, size=n)
    is_bulk = rng.random(n) < bulk_fraction
    return np.where(is_bulk, bulk_draws, tail_draws)


def sample_follower_counts(rng, n: int, exponent: float = 2.5, cap: int = 5_000_000):
    raw = rng.zipf(exponent, size=n).astype(np.int64)
    return np.minimum(raw * 40, cap)  # scaled so typical accounts have tens of followers


def make_history(rng, user_id: str, n_texts: int) -> tuple:
    kinds = ("post", "retweet", "quote")
    fragments = (
        "sharing some thoughts on this week's developments",
        "interesting read, worth a closer look",
        "not sure this holds up, does anyone have a source",
        "great discussion at the meetup yesterday",
        "numbers from the latest survey look off to me",
        "bookmarking this thread for later",
    )
    texts = []
    for i in range(n_texts):
        kind = kinds[int(rng.integers(0, len(kinds)))]
        fragment = fragments[int(rng.integers(0, len(fragments)))]
        texts.append((kind, f"{fragment} ({user_id}-{i})"))
    return tuple(texts)


def make_histogram(rng) -> tuple:
    """Counts concentrated on a handful of active hours."""
    active_hours = rng.choice(HOURS_PER_DAY, size=int(rng.integers(4, 11)), replace=False)
    histogram = [0] * HOURS_PER_DAY
    for hour in active_hours:
        histogram[int(hour)] = int(rng.integers(1, 30))
    if sum(histogram) == 0:
        histogram[int(rng.integers(0, HOURS_PER_DAY))] = 1
    return tuple(histogram)


def build_users(n_users: int, seed: int) -> tuple:
    rng = rngmod.substream(seed, "synthdata-users")
    followers = sample_follower_counts(rng, n_users)
    shares = sample_share_counts(rng, n_users)
    users = []
    for i in range(n_users):
        user_id = f"user_{i:05d}"
        share_total = int(shares[i])
        retweets = int(round(share_total * 0.7))
        users.append(
            UserRecord(
                user_id=user_id,
                follower_count=int(followers[i]),
                following_count=int(rng.integers(10, 900)),
                description=f"synthetic account {user_id}",
                post_count=int(rng.integers(0, 60)),
                retweet_count=retweets,
                quote_count=share_total - retweets,
                historical_texts=make_history(rng, user_id, int(rng.integers(2, 5))),
                activity_histogram=make_histogram(rng),
            )
        )
    return tuple(users)


def build_catalog(communities) -> tuple:
    items = []
    for community in communities:
        noun = _TOPIC_NOUNS.get(community, f"a {community} story")
        items.append(
            ContentItem(
                content_id=f"disinfo_{community}",
                topic=community,
                kind="disinformation",
                text=(
                    f"Viral claim says every trace of {noun} was quietly wiped "
                    "out overnight!! Nobody is covering it, wake up."
                ),
            )
        )
        items.append(
            ContentItem(
                content_id=f"fact_{community}",
                topic=community,
                kind="correction",
                strategy="fact_based",
                text=(
                    f"The registry covering {noun} is intact: all 3,214 filings "
                    "plus the 60-page audit summary were published on 12 March "
                    "and remain downloadable from the archive."
                ),
            )
        )
        items.append(
            ContentItem(
                content_id=f"narrative_{community}",
                topic=community,
                kind="correction",
                strategy="narrative_based",
                text=(
                    f"I worked on the team that handled {noun}. We boxed every file "
                    "ourselves and walked them to the public reading room; anyone "
                    "can still ask the desk to see them, like I did last week."
                ),
            )
        )
    return tuple(items)


def scaled_windows(total_steps: int) -> dict:
    """Stage windows proportional to the run length (T/6, T/2, 2T/3)."""
    return {
        "early": (max(1, total_steps // 6), total_steps),
        "mid": (max(1, total_steps // 2), total_steps),
        "late": (max(1, (2 * total_steps) // 3), total_steps),
    }


def build_synthetic_scenario(
    n_users: int = 689,
    communities=DEFAULT_COMMUNITIES,
    seed: int = 7,
    **param_overrides,
) -> Scenario:
    if "total_steps" in param_overrides and "intervention_windows" not in param_overrides:
        param_overrides["intervention_windows"] = scaled_windows(
            param_overrides["total_steps"]
        )
    params = SimulationParams(**{"rng_seed": seed, **param_overrides})
    users = build_users(n_users, seed)
    return make_scenario(
        params=params,
        users=users,
        communities=tuple(communities),
        content_catalog=build_catalog(communities),
        evaluator_config=EvaluatorConfig(),
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Write a synthetic scenario file.")
    parser.add_argument("--users", type=int, default=689)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--communities", nargs="+", default=list(DEFAULT_COMMUNITIES))
    parser.add_argument("--total-steps", type=int, default=72)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    scenario = build_synthetic_scenario(
        n_users=args.users,
        communities=tuple(args.communities),
        seed=args.seed,
        total_steps=args.total_steps,
    )
    save_scenario(scenario, args.out)
    print(f"wrote {args.out} ({args.users} users, {len(args.communities)} communities)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
