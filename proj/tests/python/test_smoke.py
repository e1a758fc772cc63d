import cmath
import math

import pytest

import freeflow


def test_version():
    assert freeflow.__version__ == "0.1.0"


def test_function_spec():
    f = freeflow.Function("negPow(1/2)")
    z = 0.3 + 1.7j
    assert abs(f(z) + cmath.sqrt(z)) < 1e-15


def test_two_slits():
    slits = freeflow.slit_image(-1.0, 0.0, [0.0], [1.0])
    assert len(slits) == 2
    assert abs(slits[0][0] + math.pi) < 1e-10
    assert abs(slits[1][0]) < 1e-10
    assert all(abs(tip - 0.5) < 1e-8 for _, tip in slits)


def test_flow_closed_form():
    ff = freeflow.Field.from_psi("rational(a=-1,b=0,poles=[],residues=[])")
    z, t = 0.4 + 1.1j, 1.0
    want = z + t * cmath.sqrt(2 * z) + t * t / 2
    for route in ("auto", "conformal", "ode"):
        assert abs(ff.flow(z, t, route) - want) < 1e-6
    assert abs(ff.flow_inverse(ff.flow(z, t), t) - z) < 1e-8


def test_fal2_verdicts():
    assert freeflow.fal2_check("const(0,-1)")["verdict"] == "pass"
    r = freeflow.fal2_check("pow(-0.5)")
    assert r["verdict"] == "fail"
    assert r["witness"] is not None


def test_containment():
    assert freeflow.contains_halfplane_translate("negPow(0.5)")["contains"]
    c = freeflow.contains_halfplane_translate("rational(a=0,b=0,poles=[0],residues=[1])")
    assert not c["contains"]
    assert c["decisive"] == 0.0


def test_semicircle_density():
    grid = [-1.0, 0.0, 1.5]
    d = freeflow.semigroup_density("rational(a=0,b=0,poles=[0],residues=[1])", 1.0, grid)
    for x, v, flag in zip(grid, d["density"], d["flags"]):
        assert flag == "ok"
        assert abs(v - math.sqrt(4 - x * x) / (2 * math.pi)) < 1e-3


def test_cauchy_kernel():
    ff = freeflow.Field.from_psi("const(0,-1)")
    k = ff.transition_kernel(0.5, 0.2, [0.2, 1.0])
    for u, v in zip(k["x"], k["density"]):
        assert abs(v - 0.5 / (math.pi * ((u - 0.2) ** 2 + 0.25))) < 1e-4


def test_recovery():
    r = freeflow.recover_parameters("rational(a=-0.5,b=0.25,poles=[],residues=[])")
    assert abs(r["alpha"] + 0.5) < 1e-3
    assert abs(r["beta"] - 0.25) < 1e-2


def test_errors_raise():
    with pytest.raises(freeflow.FreeflowError):
        freeflow.Function("bogus(1)")
    with pytest.raises(freeflow.FreeflowError):
        freeflow.Field.from_psi("rational(a=0,b=0,poles=[0],residues=[1])")


def test_cli_entry():
    code, out, _ = freeflow.run_cli(["fal2-check", "--phi", "pow(-0.5)"])
    assert code == 2
    assert '"verdict"' in out
