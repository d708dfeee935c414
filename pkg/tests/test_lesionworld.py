import numpy as np
import pytest

from fairgen.cohort import AttributeProfile, build_grid
from fairgen.errors import ConfigError, InputError
from fairgen.lesionworld import (
    WorldParams,
    analytic_cell_means,
    build_dataset,
    cell_statistics,
    gaussian_fixture_conditions,
    gaussian_fixture_dataset,
    load_images,
    render_ground_truth,
    save_dataset,
)


def noiseless():
    return WorldParams(pixel_noise_sigma=0.0)


class TestWorldParams:
    def test_defaults_are_valid(self, vocab):
        WorldParams().validate(vocab)

    def test_rejects_background_outside_unit_interval(self, vocab):
        with pytest.raises(ConfigError):
            WorldParams(background_base=0.9, skin_step=0.1).validate(vocab)

    def test_rejects_radius_reaching_border(self, vocab):
        with pytest.raises(ConfigError):
            WorldParams(radius_base=2.0, age_step=1.0).validate(vocab)

    def test_rejects_missing_contrast(self, vocab):
        with pytest.raises(ConfigError):
            WorldParams(lesion_contrast={}).validate(vocab)


class TestRender:
    def test_noiseless_image_has_two_levels(self, vocab):
        params = noiseless()
        profile = AttributeProfile(sex=0, age_band=2, skin_type=3)
        sample = render_ground_truth(params, profile, 0, vocab)
        levels = np.unique(sample.image)
        bg = params.background_level(profile)
        np.testing.assert_allclose(levels, [bg, bg + 0.3], rtol=1e-12)
        disk_pixels = int(np.sum(sample.image > bg + 0.15))
        assert disk_pixels == int(params.disk_mask(profile).sum())

    def test_deterministic_given_seed(self, vocab):
        profile = AttributeProfile(1, 4, 2)
        a = render_ground_truth(WorldParams(), profile, 77, vocab)
        b = render_ground_truth(WorldParams(), profile, 77, vocab)
        assert np.array_equal(a.image, b.image)

    def test_label_equals_profile_diagnosis(self, vocab):
        sample = render_ground_truth(WorldParams(), AttributeProfile(0, 0, 0), 1, vocab)
        assert sample.label == "melanoma"

    def test_pixels_stay_in_unit_interval(self, vocab):
        for seed in range(20):
            img = render_ground_truth(
                WorldParams(), AttributeProfile(1, 7, 6), seed, vocab
            ).image
            assert img.min() >= 0.0 and img.max() <= 1.0

    def test_background_mean_matches_law_of_large_numbers(self, vocab):
        # 1000 renders: empirical background mean within 3 sigma / sqrt(N)
        params = WorldParams()
        profile = AttributeProfile(sex=0, age_band=0, skin_type=2)
        mask = params.disk_mask(profile).ravel()
        n_bg = int((~mask).sum())
        means = [
            render_ground_truth(params, profile, seed, vocab).image[~mask].mean()
            for seed in range(1000)
        ]
        expected = params.background_level(profile)
        band = 3 * params.pixel_noise_sigma / np.sqrt(n_bg * 1000)
        assert abs(np.mean(means) - expected) < band


class TestDataset:
    def test_cardinality(self, vocab):
        dataset = build_dataset(WorldParams(), vocab, 2, 0)
        assert len(dataset) == 224

    def test_profile_multiset_matches_grid(self, vocab):
        dataset = build_dataset(WorldParams(), vocab, 3, 0)
        counts = {}
        for s in dataset:
            counts[s.profile] = counts.get(s.profile, 0) + 1
        assert counts == {p: 3 for p in build_grid(vocab)}

    def test_deterministic_under_master_seed(self, vocab):
        a = build_dataset(WorldParams(), vocab, 2, 9)
        b = build_dataset(WorldParams(), vocab, 2, 9)
        assert all(np.array_equal(x.image, y.image) for x, y in zip(a, b))

    def test_per_cell_means_within_three_standard_errors(self, vocab):
        # analytic moment oracle at n=500 on a few cells
        params = WorldParams()
        n = 500
        profiles = [AttributeProfile(0, 0, 0), AttributeProfile(1, 3, 5)]
        for profile in profiles:
            mask = params.disk_mask(profile).ravel()
            n_bg = int((~mask).sum())
            imgs = [
                render_ground_truth(params, profile, seed, vocab).image
                for seed in range(n)
            ]
            emp = np.mean([img[~mask].mean() for img in imgs])
            se = params.pixel_noise_sigma / np.sqrt(n_bg * n)
            assert abs(emp - params.background_level(profile)) < 3 * se


class TestCellStatistics:
    def test_noiseless_world_has_zero_variance(self, vocab):
        params = noiseless()
        dataset = build_dataset(params, vocab, 3, 0)
        for stats in cell_statistics(dataset, params, vocab).values():
            # identical renders; only float rounding of the mean survives
            assert stats.background_var == pytest.approx(0.0, abs=1e-30)
            assert stats.disk_var == pytest.approx(0.0, abs=1e-30)

    def test_single_sample_mean_is_that_sample(self, vocab):
        params = WorldParams()
        profile = AttributeProfile(0, 1, 1)
        sample = render_ground_truth(params, profile, 5, vocab)
        stats = cell_statistics([sample], params, vocab)[profile]
        mask = params.disk_mask(profile).ravel()
        assert stats.n == 1
        assert stats.background_mean == pytest.approx(sample.image[~mask].mean())

    def test_empty_dataset_rejected(self, vocab):
        with pytest.raises(InputError):
            cell_statistics([], WorldParams(), vocab)

    def test_monotone_in_skin_and_age(self, vocab):
        params = noiseless()
        backgrounds = [
            analytic_cell_means(params, AttributeProfile(0, 0, k), vocab)[0]
            for k in range(7)
        ]
        assert all(b2 > b1 for b1, b2 in zip(backgrounds, backgrounds[1:]))
        radii = [
            analytic_cell_means(params, AttributeProfile(0, a, 0), vocab)[2]
            for a in range(8)
        ]
        assert all(r2 > r1 for r1, r2 in zip(radii, radii[1:]))


class TestDump:
    def test_save_and_reload_images(self, vocab, tmp_path):
        params = WorldParams()
        dataset = build_dataset(params, vocab, 1, 4)
        rec, img = tmp_path / "d.tsv", tmp_path / "d.img"
        save_dataset(dataset, rec, img, params, vocab)
        loaded = load_images(img)
        assert loaded.shape == (112, 256)
        np.testing.assert_array_equal(loaded[5], dataset[5].image)
        lines = rec.read_text().splitlines()
        assert lines[0].startswith("FAIRGEN-DATASET 1")
        assert len(lines) == 113


class TestGaussianFixture:
    def test_four_distinct_conditions(self, vocab):
        profiles, means = gaussian_fixture_conditions(vocab)
        assert len(profiles) == len(set(profiles)) == 4
        assert means.shape == (4, 2)

    def test_dataset_means_near_component_means(self, vocab):
        data = gaussian_fixture_dataset(vocab, 500, seed=3)
        profiles, means = gaussian_fixture_conditions(vocab)
        for profile, mean in zip(profiles, means):
            draws = np.stack([x for x, p in data if p == profile])
            assert np.linalg.norm(draws.mean(axis=0) - mean) < 0.05
