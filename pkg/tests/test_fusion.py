"""Fusion math: projectors, assembly, action head, loss gradient."""

import numpy as np
import pytest

from clank.errors import DimMismatchError, ShapeMismatchError
from clank.fusion import (
    ActionBlock,
    FeatureBlock,
    Linear,
    MLP,
    Modality,
    ModelDims,
    ProprioParams,
    action_head,
    assemble_sequence,
    backbone_stub,
    concat_modalities,
    concat_views,
    extract_action_hidden,
    init_params,
    l1_loss,
    project_audio,
    project_proprio,
    project_visual,
)

DIMS = ModelDims()


def block(rows, dim, modality=Modality.VISUAL, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return FeatureBlock(scale * rng.standard_normal((rows, dim)), modality)


def zero_mlp(widths):
    layers = tuple(
        Linear(weight=np.zeros((a, b)), bias=np.zeros(b))
        for a, b in zip(widths, widths[1:])
    )
    return MLP(layers=layers)


class TestConcatViews:
    def test_two_camera_views_stack(self):
        third = block(256, 48, seed=1)
        wrist = block(256, 48, seed=2)
        merged = concat_views(third, wrist)
        assert merged.rows == 512
        np.testing.assert_array_equal(merged.data[:256], third.data)
        np.testing.assert_array_equal(merged.data[256:], wrist.data)

    def test_empty_wrist_is_identity(self):
        third = block(256, 48, seed=1)
        empty = FeatureBlock(np.zeros((0, 48)), Modality.VISUAL)
        merged = concat_views(third, empty)
        np.testing.assert_array_equal(merged.data, third.data)

    def test_width_mismatch_rejected(self):
        with pytest.raises(DimMismatchError):
            concat_views(block(4, 32), block(4, 64))

    def test_non_visual_rejected(self):
        with pytest.raises(DimMismatchError):
            concat_views(block(4, 32), block(4, 32, modality=Modality.AUDIO))


class TestProjectors:
    def test_identity_visual_projection(self):
        x = block(7, 64, seed=3)
        out = project_visual(x, Linear.identity(64))
        np.testing.assert_array_equal(out.data, x.data)

    def test_visual_width_checked(self):
        with pytest.raises(DimMismatchError):
            project_visual(block(7, 48), Linear.identity(64))

    def test_audio_zero_params_map_zero_to_zero(self):
        x = FeatureBlock(np.zeros((4, 32)), Modality.AUDIO)
        out = project_audio(x, zero_mlp([32, 64, 64, 64]))
        assert out.rows == 4 and out.dim == 64
        assert not out.data.any()

    def test_proprio_yields_single_row(self):
        params = init_params(DIMS, seed=4)
        out = project_proprio(np.linspace(-1, 1, DIMS.d_prop), params.proprio)
        assert out.rows == 1
        assert out.dim == DIMS.d_llm

    def test_proprio_state_width_checked(self):
        params = init_params(DIMS, seed=4)
        with pytest.raises(DimMismatchError):
            project_proprio(np.zeros(DIMS.d_prop + 1), params.proprio)

    def test_row_counts_preserved(self):
        params = init_params(DIMS, seed=5)
        for rows in (1, 4, 512):
            out = project_visual(block(rows, DIMS.d_vis, seed=rows), params.visual)
            assert out.rows == rows and out.dim == DIMS.d_llm


class TestAssembleSequence:
    def assemble(self, dims, seed=6):
        rng = np.random.default_rng(seed)
        lang = FeatureBlock(rng.standard_normal((dims.n_lang, dims.d_llm)), Modality.LANGUAGE)
        modal = FeatureBlock(
            rng.standard_normal((dims.n_visual + dims.n_audio + 1, dims.d_llm)),
            Modality.FUSED,
        )
        empty = rng.standard_normal((dims.action_slots, dims.d_llm))
        return assemble_sequence(lang, modal, dims, empty)

    def test_default_dims_row_count(self):
        # 10 + 512 + 4 + 1 + 8*7 = 583
        sequence = self.assemble(DIMS)
        assert sequence.rows == 583 == DIMS.sequence_rows

    def test_minimal_dims_row_count(self):
        dims = ModelDims(n_lang=1, n_visual=1, n_audio=1, horizon=1, action_dim=1)
        assert self.assemble(dims).rows == 5

    def test_zero_empty_params_leave_zero_tail(self):
        rng = np.random.default_rng(7)
        lang = FeatureBlock(rng.standard_normal((DIMS.n_lang, DIMS.d_llm)), Modality.LANGUAGE)
        modal = FeatureBlock(
            rng.standard_normal((DIMS.n_visual + DIMS.n_audio + 1, DIMS.d_llm)),
            Modality.FUSED,
        )
        sequence = assemble_sequence(
            lang, modal, DIMS, np.zeros((DIMS.action_slots, DIMS.d_llm))
        )
        assert not sequence.data[-DIMS.action_slots :].any()
        assert sequence.data[: -DIMS.action_slots].any()

    def test_ordering_is_lang_modal_empty(self):
        dims = ModelDims(n_lang=2, n_visual=1, n_audio=1, horizon=1, action_dim=2, d_llm=3)
        lang = FeatureBlock(np.full((2, 3), 1.0), Modality.LANGUAGE)
        modal = FeatureBlock(np.full((3, 3), 2.0), Modality.FUSED)
        empty = np.full((2, 3), 3.0)
        sequence = assemble_sequence(lang, modal, dims, empty)
        np.testing.assert_array_equal(sequence.data[:2], 1.0)
        np.testing.assert_array_equal(sequence.data[2:5], 2.0)
        np.testing.assert_array_equal(sequence.data[5:], 3.0)

    def test_wrong_lang_rows_rejected(self):
        rng = np.random.default_rng(8)
        lang = FeatureBlock(rng.standard_normal((3, DIMS.d_llm)), Modality.LANGUAGE)
        modal = FeatureBlock(
            rng.standard_normal((DIMS.n_visual + DIMS.n_audio + 1, DIMS.d_llm)),
            Modality.FUSED,
        )
        with pytest.raises(DimMismatchError):
            assemble_sequence(lang, modal, DIMS, np.zeros((DIMS.action_slots, DIMS.d_llm)))

    def test_row_identity_over_random_dims(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            dims = ModelDims(
                d_llm=int(rng.integers(1, 32)),
                n_lang=int(rng.integers(1, 64)),
                n_visual=int(rng.integers(1, 64)),
                n_audio=int(rng.integers(1, 64)),
                horizon=int(rng.integers(1, 8)),
                action_dim=int(rng.integers(1, 8)),
            )
            sequence = self.assemble(dims, seed=int(rng.integers(1 << 30)))
            expected = dims.n_lang + dims.n_visual + dims.n_audio + 1 + dims.action_slots
            assert sequence.rows == expected


class TestBackboneStub:
    def test_identity_mode(self):
        x = block(5, 16, seed=10)
        np.testing.assert_array_equal(backbone_stub(x, identity=True).data, x.data)

    def test_seeded_determinism(self):
        x = block(5, 16, seed=11)
        a = backbone_stub(x, seed=3)
        b = backbone_stub(x, seed=3)
        c = backbone_stub(x, seed=4)
        assert np.array_equal(a.data, b.data)
        assert not np.array_equal(a.data, c.data)

    def test_shape_preserved_and_position_independent(self):
        x = block(6, 16, seed=12)
        out = backbone_stub(x, seed=5)
        assert out.data.shape == x.data.shape
        # same row content maps identically regardless of position
        twin = FeatureBlock(x.data[::-1].copy(), x.modality)
        out_twin = backbone_stub(twin, seed=5)
        np.testing.assert_allclose(out_twin.data[::-1], out.data)


class TestExtractActionHidden:
    def test_takes_last_rows(self):
        dims = ModelDims(n_lang=1, n_visual=4, n_audio=1, horizon=1, action_dim=3, d_llm=2)
        decoded = block(10, 2, modality=Modality.FUSED, seed=13)
        hidden = extract_action_hidden(decoded, dims)
        # oracle: explicit slicing by loop
        for offset in range(3):
            np.testing.assert_array_equal(hidden.data[offset], decoded.data[7 + offset])

    def test_whole_block_boundary(self):
        dims = ModelDims(horizon=2, action_dim=5, d_llm=4)
        decoded = block(10, 4, seed=14)
        hidden = extract_action_hidden(decoded, dims)
        np.testing.assert_array_equal(hidden.data, decoded.data)

    def test_too_few_rows_rejected(self):
        dims = ModelDims(horizon=4, action_dim=4)
        with pytest.raises(ShapeMismatchError):
            extract_action_hidden(block(10, 8), dims)


class TestActionHead:
    def test_zero_params_give_zero_actions(self):
        dims = ModelDims(horizon=2, action_dim=3, d_llm=8)
        hidden = block(6, 8, seed=15)
        actions = action_head(hidden, zero_mlp([8, 8, 8, 8, 1]), dims)
        assert actions.values.shape == (2, 3)
        assert not actions.values.any()

    def test_outputs_always_in_range(self):
        dims = ModelDims(horizon=3, action_dim=4, d_llm=16)
        rng = np.random.default_rng(16)
        for scale in (1.0, 100.0, 10000.0):
            hidden = block(12, 16, seed=int(scale), scale=scale)
            params = init_params(dims, seed=17)
            values = action_head(hidden, params.action_head, dims).values
            assert (np.abs(values) <= 1.0).all()
        del rng

    def test_reshape_indexing_matches_explicit_loop(self):
        dims = ModelDims(horizon=2, action_dim=3, d_llm=5)
        hidden = block(6, 5, seed=18)
        params = init_params(dims, seed=19)
        actions = action_head(hidden, params.action_head, dims)
        # independent forward pass, one row at a time
        for k in range(2):
            for i in range(3):
                row = hidden.data[k * 3 + i]
                for layer in params.action_head.layers[:-1]:
                    row = np.tanh(row @ layer.weight + layer.bias)
                last = params.action_head.layers[-1]
                scalar = np.tanh(row @ last.weight + last.bias)[0]
                assert actions.values[k, i] == pytest.approx(scalar, abs=1e-15)

    def test_row_count_checked(self):
        dims = ModelDims(horizon=2, action_dim=3, d_llm=5)
        params = init_params(dims, seed=20)
        with pytest.raises(ShapeMismatchError):
            action_head(block(5, 5), params.action_head, dims)


class TestL1Loss:
    def test_identical_blocks_zero_loss(self):
        values = np.random.default_rng(21).uniform(-1, 1, (4, 3))
        result = l1_loss(ActionBlock(values), ActionBlock(values.copy()))
        assert result.loss == 0.0
        assert not result.grad.any()

    def test_unit_gap_unit_loss(self):
        pred = ActionBlock(np.zeros((5, 2)))
        truth = ActionBlock(np.ones((5, 2)))
        result = l1_loss(pred, truth)
        assert result.loss == 1.0
        np.testing.assert_array_equal(result.grad, -np.ones((5, 2)) / 10)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeMismatchError):
            l1_loss(ActionBlock(np.zeros((2, 2))), ActionBlock(np.zeros((2, 3))))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(22)
        pred_values = rng.uniform(-0.9, 0.9, (3, 4))
        truth_values = rng.uniform(-0.9, 0.9, (3, 4))
        # keep every coordinate away from the tie point
        gap = np.abs(pred_values - truth_values)
        pred_values[gap < 1e-3] += 0.05
        result = l1_loss(ActionBlock(pred_values), ActionBlock(truth_values))

        step = 1e-6
        for k in range(3):
            for i in range(4):
                bumped = pred_values.copy()
                bumped[k, i] += step
                dipped = pred_values.copy()
                dipped[k, i] -= step
                numeric = (
                    np.mean(np.abs(bumped - truth_values))
                    - np.mean(np.abs(dipped - truth_values))
                ) / (2 * step)
                assert result.grad[k, i] == pytest.approx(numeric, abs=1e-6)

    def test_loss_nonnegative_and_zero_iff_equal(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            a = rng.uniform(-1, 1, (2, 2))
            b = rng.uniform(-1, 1, (2, 2))
            result = l1_loss(ActionBlock(a), ActionBlock(b))
            assert result.loss >= 0
            assert (result.loss == 0) == np.array_equal(a, b)


class TestEndToEndDeterminism:
    def run_pipeline(self, seed):
        rng = np.random.default_rng(seed)
        dims = ModelDims()
        params = init_params(dims, seed=seed)
        third = FeatureBlock(rng.standard_normal((256, dims.d_vis)), Modality.VISUAL)
        wrist = FeatureBlock(rng.standard_normal((256, dims.d_vis)), Modality.VISUAL)
        audio = FeatureBlock(rng.standard_normal((dims.n_audio, dims.d_aud)), Modality.AUDIO)
        lang = FeatureBlock(rng.standard_normal((dims.n_lang, dims.d_llm)), Modality.LANGUAGE)
        state = rng.standard_normal(dims.d_prop)
        modal = concat_modalities(
            project_visual(concat_views(third, wrist), params.visual),
            project_audio(audio, params.audio),
            project_proprio(state, params.proprio),
        )
        sequence = assemble_sequence(lang, modal, dims, params.empty_action)
        decoded = backbone_stub(sequence, seed=seed)
        return action_head(extract_action_hidden(decoded, dims), params.action_head, dims)

    def test_same_seed_identical_actions(self):
        a = self.run_pipeline(99)
        b = self.run_pipeline(99)
        c = self.run_pipeline(100)
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_action_block_validates_range(self):
        with pytest.raises(ValueError):
            ActionBlock(np.array([[1.5]]))
