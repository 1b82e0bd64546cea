import json

import numpy as np
import pytest
from pydantic import ValidationError

from errors import DimensionMismatch
from models import BasisFile, DensityMatrixFile, VerdictOut, format_float, render_json
from services.graph import classify
from services.qudit import OrthonormalBasis, joint_distribution


class TestRender:
    def test_seventeen_significant_digits(self):
        assert render_json({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}\n'

    def test_round_trips_exactly(self):
        values = np.random.default_rng(0).random(20).tolist()
        assert json.loads(render_json({"v": values}))["v"] == values

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            format_float(float("nan"))

    def test_nested_models(self):
        out = json.loads(render_json(BasisFile.from_basis(OrthonormalBasis.computational(2))))
        assert out == {"local_dim": 2, "vectors_re": [[1, 0], [0, 1]], "vectors_im": [[0, 0], [0, 0]]}


class TestDensityMatrixFile:
    def test_round_trip(self, singlet):
        again = DensityMatrixFile.from_density(singlet).to_density()
        assert again.distance(singlet) == 0.0

    def test_shape_checked(self):
        with pytest.raises(ValidationError):
            DensityMatrixFile(local_dim=2, re=[[1.0]], im=[[0.0]])


class TestBasisFile:
    def test_declared_dimension_must_match(self):
        f = BasisFile(local_dim=3, vectors_re=[[1, 0], [0, 1]], vectors_im=[[0, 0], [0, 0]])
        with pytest.raises(DimensionMismatch):
            f.to_basis()


class TestVerdictOut:
    def test_singlet_display_is_one_based(self, singlet):
        out = VerdictOut.build(classify(joint_distribution(singlet, OrthonormalBasis.computational(2))))
        assert out.permutation == [2, 1]
        assert out.signature == "[0,1]"
        assert out.edges == [[1, 2], [2, 1]]
        assert out.perfect
