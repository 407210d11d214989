import pytest

from toroprep.algebra import Constant, Status
from toroprep.charts import (
    IDENTITY,
    Center,
    ChartError,
    ChartSubstitution,
    divide_rows,
    enumerate_charts,
    normalize,
    substitute,
)
from toroprep.forms import LocalForm, translate, trivial, validate

T = trivial()


def eq_a6(a, b):
    return LocalForm.make([(a, 0, 0), (0, b, 0), (0, 0, 1)], None, "xy", "uv")


def test_point_has_three_charts():
    charts = enumerate_charts(Center.point(), step=1)
    assert [c.name for c in charts] == ["point.x", "point.y", "point.z"]
    x = charts[0]
    assert x.monomial == ((1, 0, 0), (1, 0, 0), (1, 0, 0))
    assert [t and (t[0], t[1].label) for t in x.translates] == [None, (1, "α1"), (2, "β1")]


def test_curve_charts():
    lead, tail = enumerate_charts(Center.curve("x", "z"))
    # x = x1, z = x1 (z1 + β)
    assert lead.monomial == ((1, 0, 0), (0, 1, 0), (1, 0, 0))
    assert lead.translates[2][0] == 2
    # x = x1 z1, z = z1
    assert tail.monomial == ((1, 0, 1), (0, 1, 0), (0, 0, 1))
    assert tail.translates == (None, None, None)


def test_two_curve_charts():
    lead, tail = enumerate_charts(Center.two_curve("x", "y"))
    assert lead.monomial[1] == (1, 0, 0) and lead.translates[1][0] == 1
    assert tail.monomial[0] == (1, 1, 0) and tail.monomial[1] == (0, 1, 0)


def test_center_repeating_a_coordinate():
    with pytest.raises(ChartError):
        enumerate_charts(Center("curve", (0, 0)))


def test_point_chart_z_on_eq_a6():
    z = enumerate_charts(Center.point())[2]
    (br,) = substitute(eq_a6(2, 3), z).branches
    assert br.form.matrix == ((2, 0, 2), (0, 3, 3), (0, 0, 1))
    assert br.form.upstairs == 3


def test_identity_chart():
    f = eq_a6(2, 3)
    res = substitute(f, IDENTITY)
    assert len(res.branches) == 1
    assert res.branches[0].form == f


def test_point_chart_x_zero_branch():
    x = enumerate_charts(Center.point(), step=0)[0]
    res = substitute(eq_a6(2, 3), x)
    assert len(res.branches) == 4
    zero = [b for b in res.branches if all(s is Status.ZERO for _, s in b.condition)]
    assert zero[0].form.matrix == ((2, 0, 0), (3, 3, 0), (1, 0, 1))


def test_branches_partition_the_constants():
    x = enumerate_charts(Center.point(), step=0)[0]
    conds = [dict(b.condition) for b in substitute(eq_a6(1, 1), x).branches]
    assert len({tuple(sorted(c.items())) for c in conds}) == 4
    assert all(set(c) == {"α0", "β0"} for c in conds)


def test_translate_power_absorbed_when_nonzero():
    nz = Constant("α", Status.NONZERO)
    f = LocalForm.make([(2, 0, 0), (3, 0, 0), (0, 0, 1)], [T, translate("y", nz), T], "x", "uv")
    tail = enumerate_charts(Center.curve("x", "z"))[1]
    (br,) = substitute(f, tail).branches
    assert br.form.rows[1].factor.kind == "translate"
    assert br.form.matrix[1] == (3, 0, 3)
    assert validate(br.form) == []


def test_divide_rows():
    f = LocalForm.make([(2, 0, 2), (0, 1, 0), (0, 0, 1)], None, "xz", "uw")
    assert divide_rows(f, "u", "w").matrix[0] == (2, 0, 1)
    assert divide_rows(f, "u", "u").matrix[0] == (0, 0, 0)
    g = LocalForm.make([(1, 0, 0), (0, 1, 0), (0, 0, 2)], None, "xz", "uw")
    assert divide_rows(g, "u", "w") is None


def test_normalize_examples():
    nz = Constant("α", Status.NONZERO)
    z = Constant("α", Status.ZERO)
    f = LocalForm.make([(2, 0, 0), (3, 0, 0), (0, 0, 1)], [T, translate("y", nz), T], "x", "uv")
    n = normalize(f)
    assert n.rows[1].factor.kind == "unit" and n.matrix[1] == (3, 0, 0)
    assert normalize(n) == n
    g = LocalForm.make([(2, 0, 0), (3, 0, 0), (0, 0, 1)], [T, translate("y", z), T], "x", "uv")
    m = normalize(g)
    assert m.matrix[1] == (3, 1, 0) and m.rows[1].factor.kind == "trivial"
    assert normalize(eq_a6(2, 2)) == eq_a6(2, 2)


def test_custom_chart_substitution_specializes():
    c = ChartSubstitution("t", ((1, 0, 0), (1, 0, 0), (0, 0, 1)), (None, (1, Constant("γ0")), None))
    zero = c.specialize({"γ0": Status.ZERO})
    assert zero.monomial[1] == (1, 1, 0) and zero.translates[1] is None
