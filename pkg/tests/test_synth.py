"""Generator determinism, planted structure, and the naive counting oracle."""

from __future__ import annotations

import math

import numpy as np
import pytest

from engagesched.errors import EngageError
from engagesched.ingest import load_page_metadata, parse_event_log
from engagesched.profiles import cumulative_profile, delay_distribution
from engagesched.synth import (
    CategorySpec,
    SynthConfig,
    brute_force_counts,
    generate,
    load_config,
    peaked_intensity,
)

from conftest import post_line, reaction_line, store_from_synth


def small_config(seed=7, **overrides):
    spec = dict(
        name="alpha",
        n_pages=2,
        posts_per_page=20,
        reactions_per_page=60,
        reaction_intensity=peaked_intensity(40, 5.0, 1.0),
    )
    spec.update(overrides)
    return SynthConfig(seed=seed, categories=(CategorySpec(**spec),))


class TestGenerateDeterminism:
    def test_same_seed_same_bytes(self):
        a = generate(small_config())
        b = generate(small_config())
        assert a.log_bytes == b.log_bytes
        assert a.pages_csv == b.pages_csv
        assert a.manifest == b.manifest

    def test_different_seed_different_bytes(self):
        a = generate(small_config(seed=1))
        b = generate(small_config(seed=2))
        assert a.log_bytes != b.log_bytes

    def test_zero_volume_empty_log(self):
        cfg = small_config(posts_per_page=0, reactions_per_page=0)
        result = generate(cfg)
        assert result.log_bytes == b""
        assert result.manifest["counts"] == {
            "posts": 0,
            "reactions": 0,
            "orphan_reactions": 0,
        }
        # pages still exist in the metadata
        assert len(result.pages_csv.strip().splitlines()) == 3


class TestGeneratedStructure:
    def test_log_parses_clean_within_year_range(self):
        cfg = small_config()
        result = generate(cfg)
        store = store_from_synth(result, cfg.year_range)
        assert len(store.posts) == result.manifest["counts"]["posts"]
        assert len(store.reactions) == result.manifest["counts"]["reactions"]

    def test_metadata_matches_manifest(self):
        result = generate(small_config())
        pages = load_page_metadata(result.pages_csv)
        assert set(pages) == set(result.manifest["pages"])
        for pid, meta in pages.items():
            assert meta.label == result.manifest["pages"][pid]["observed_label"]

    def test_concentrated_intensity_hits_target_bucket(self):
        cfg = SynthConfig(
            seed=11,
            categories=(
                CategorySpec(
                    name="solo",
                    n_pages=1,
                    posts_per_page=10,
                    reactions_per_page=10_000,
                    reaction_intensity=peaked_intensity(40, 1.0, 0.0),
                    peak_bucket=40,
                ),
            ),
        )
        result = generate(cfg)
        counts = brute_force_counts(result.log_bytes, {"solo_pg000": 0})
        reaction = counts["solo_pg000"]["reaction"]
        assert reaction[39] / sum(reaction) >= 0.99

    def test_intensity_mode_parents_precede_reactions(self):
        cfg = small_config()
        result = generate(cfg)
        store = store_from_synth(result, cfg.year_range)
        for pid in store.page_ids:
            cols = store.reactions_of(pid)
            resolved = cols.delay_s[cols.delay_s >= 0]
            assert resolved.size > 0
            assert np.all(resolved >= 0)

    def test_delay_mode_matches_analytic_cdf(self):
        rate = 0.5
        cfg = SynthConfig(
            seed=23,
            categories=(
                CategorySpec(
                    name="d",
                    n_pages=1,
                    posts_per_page=50,
                    reactions_per_page=5000,
                    reaction_mode="delay",
                    delay_rate_per_hour=rate,
                ),
            ),
        )
        result = generate(cfg)
        store = store_from_synth(result, cfg.year_range)
        hist = delay_distribution(store)
        assert hist.beyond_horizon == 0
        cap = 1.0 - math.exp(-rate * 168.0)
        for edge, observed in zip(hist.edges_hours[1:], hist.cdf):
            analytic = (1.0 - math.exp(-rate * edge)) / cap
            assert observed == pytest.approx(analytic, abs=0.02)

    def test_label_noise_count_exact(self):
        cats = tuple(
            CategorySpec(name=n, n_pages=5, posts_per_page=2, reactions_per_page=0)
            for n in ("a", "b")
        )
        cfg = SynthConfig(seed=3, categories=cats, label_noise_rate=0.2)
        result = generate(cfg)
        flipped = [
            pid
            for pid, info in result.manifest["pages"].items()
            if info["observed_label"] != info["true_label"]
        ]
        assert len(flipped) == 2
        labels = {c.true_label for c in cats}
        for pid in flipped:
            assert result.manifest["pages"][pid]["observed_label"] in labels

    def test_noise_zero_keeps_labels(self):
        result = generate(small_config())
        for info in result.manifest["pages"].values():
            assert info["observed_label"] == info["true_label"]

    def test_delay_mode_without_posts_raises(self):
        cfg = small_config(posts_per_page=0, reaction_mode="delay")
        with pytest.raises(EngageError, match="delay mode"):
            generate(cfg)

    def test_zero_intensity_rejected(self):
        with pytest.raises(EngageError, match="positive total"):
            small_config(reaction_intensity=np.zeros(96))

    def test_noise_with_single_label_rejected(self):
        cfg = SynthConfig(
            seed=1,
            categories=(
                CategorySpec(name="only", n_pages=4, posts_per_page=1, reactions_per_page=0),
            ),
            label_noise_rate=0.5,
        )
        with pytest.raises(EngageError, match="distinct labels"):
            generate(cfg)


class TestBruteForceCounts:
    def test_empty_log(self):
        assert brute_force_counts(b"", {"p1": 0}) == {}

    def test_handcrafted_tally(self):
        lines = [
            post_line("a", "p1", 300),  # 00:05 local -> bucket 1
            reaction_line("r", "p1", 13 * 3600 + 300),  # 13:05 -> bucket 53
            post_line("b", "p2", 0),  # +330 -> 05:30 -> bucket 23
        ]
        counts = brute_force_counts("\n".join(lines), {"p1": 0, "p2": 330})
        assert counts["p1"]["posting"][0] == 1
        assert counts["p1"]["reaction"][52] == 1
        assert counts["p2"]["posting"][22] == 1
        assert sum(counts["p1"]["posting"]) == 1

    def test_malformed_line_raises(self):
        with pytest.raises(EngageError, match="line 1"):
            brute_force_counts("not json", {"p1": 0})

    def test_unknown_page_raises(self):
        with pytest.raises(EngageError, match="unknown page"):
            brute_force_counts(post_line("a", "ghost", 0), {"p1": 0})

    def test_matches_profiles_on_random_log(self):
        cfg = SynthConfig(
            seed=41,
            categories=(
                CategorySpec(
                    name="x",
                    n_pages=3,
                    posts_per_page=100,
                    reactions_per_page=230,
                    reaction_intensity=peaked_intensity(17, 4.0, 1.0),
                    tz_offset_minutes=330,
                ),
            ),
        )
        result = generate(cfg)
        pages = load_page_metadata(result.pages_csv)
        offsets = {pid: meta.tz_offset_minutes for pid, meta in pages.items()}
        oracle = brute_force_counts(result.log_bytes, offsets)
        store, report = parse_event_log(result.log_bytes, pages, cfg.year_range)
        assert report.rejected_total == 0
        for pid in store.page_ids:
            expected = oracle.get(pid, {"posting": [0] * 96, "reaction": [0] * 96})
            for kind in ("posting", "reaction"):
                got = cumulative_profile(store, pid, kind).counts
                assert got.tolist() == expected[kind]


class TestLoadConfig:
    TEXT = """
    # generator settings
    seed = 42
    year_start = 2012
    year_end = 2013
    label_noise_rate = 0.1
    content_type_mix = 0.5,0.3,0.2,0.0
    reaction_kind_mix = 0.2,0.7,0.1

    category.sport.n_pages = 4
    category.sport.posts_per_page = 30
    category.sport.reactions_per_page = 200
    category.sport.reaction_peak_bucket = 40
    category.sport.reaction_peak_weight = 6
    category.sport.mode = intensity

    category.news.n_pages = 2
    category.news.posts_per_page = 10
    category.news.reactions_per_page = 50
    category.news.mode = delay
    category.news.delay_rate_per_hour = 0.25
    category.news.tz_offset_minutes = -240
    """

    def test_round_trip(self):
        cfg = load_config(self.TEXT)
        assert cfg.seed == 42
        assert cfg.year_range == (2012, 2013)
        assert cfg.label_noise_rate == pytest.approx(0.1)
        assert cfg.content_type_mix == (0.5, 0.3, 0.2, 0.0)
        sport, news = cfg.categories
        assert sport.name == "sport"
        assert sport.reaction_intensity[39] == pytest.approx(6.0)
        assert sport.peak_bucket == 40
        assert news.reaction_mode == "delay"
        assert news.tz_offset_minutes == -240
        result = generate(cfg)
        assert result.manifest["counts"]["posts"] == 4 * 30 + 2 * 10

    def test_unknown_key_raises(self):
        with pytest.raises(EngageError, match="unknown key"):
            load_config("seed = 1\nvolume = 3\ncategory.a.n_pages = 1\n")

    def test_unknown_category_field_raises(self):
        with pytest.raises(EngageError, match="unknown category field"):
            load_config("seed = 1\ncategory.a.pages = 1\n")

    def test_missing_seed_raises(self):
        with pytest.raises(EngageError, match="seed"):
            load_config("category.a.n_pages = 1\n")

    def test_bad_line_raises(self):
        with pytest.raises(EngageError, match="config line"):
            load_config("seed 1\n")
