import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tonti.compiler import compile_q_state, compile_static_node_potential
from tonti.errors import (
    NetlistSyntaxError,
    NoReferenceNode,
    TontiError,
    TransducerOnPassiveBranch,
    UnknownDirective,
)
from tonti.io import emit_equations, emit_trajectory, lower, parse, print_netlist
from tonti.io.cli import main
from tonti.io.netlist import BranchDecl, MeshDecl
from tonti.quantities import TimeGrid
from tonti.solver import integrate

from helpers import FIXTURES, fixture

NETS = sorted(p.name for p in FIXTURES.glob("*.net"))


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def test_fixture_counts():
    cx = fixture("electromech.net").complex
    assert (cx.n_nodes, cx.n_branches, cx.n_meshes) == (9, 9, 3)
    cx = fixture("static_example1.net").complex
    assert (cx.n_nodes, cx.n_branches, cx.n_meshes) == (3, 4, 2)


def test_empty_input():
    net = parse("")
    assert net.statements == ()
    with pytest.raises(NoReferenceNode) as info:
        lower(parse("# only a comment\n"))
    assert info.value.span == (1, 1)


def test_short_line_reports_column():
    with pytest.raises(NetlistSyntaxError) as info:
        parse("NODE A B\nBRANCH l1 A\n")
    err = info.value
    assert (err.line, err.col) == (2, 12)
    assert err.expected == "head node"
    assert str(err).startswith("line 2, col 12:")


def test_bad_value_column():
    with pytest.raises(NetlistSyntaxError) as info:
        parse("NODE A B\nBRANCH l A B\nR l abc\n")
    assert (info.value.line, info.value.col) == (3, 5)


def test_unknown_directive():
    with pytest.raises(UnknownDirective) as info:
        parse("NODE A\n  WIRE x A A\n")
    assert (info.value.line, info.value.col) == (2, 3)


def test_invalid_utf8():
    with pytest.raises(NetlistSyntaxError) as info:
        parse(b"NODE A\nNODE \xff\n")
    assert (info.value.line, info.value.col) == (2, 6)


@pytest.mark.parametrize("name", NETS)
def test_round_trip(name):
    net = parse((FIXTURES / name).read_text())
    again = parse(print_netlist(net))
    assert again == net
    assert print_netlist(again) == print_netlist(net)


def test_parse_structures():
    net = parse((FIXTURES / "static_example1.net").read_text())
    assert net.node_ids == ["A", "B", "G"]
    assert net.branches[0] == BranchDecl("l1", "A", "G")
    assert net.meshes[1] == MeshDecl("M2", (("l2", -1), ("l3", 1), ("l4", 1)))


def test_missing_ref_points_at_first_statement():
    with pytest.raises(NoReferenceNode) as info:
        lower(parse("\n\nNODE A B\nBRANCH l A B\nR l 1\n"))
    assert info.value.span == (3, 1)


def test_transformer_on_passive_branch_has_span():
    text = ("NODE a b c d\nBRANCH x a b\nBRANCH y c d\nR x 1\nR y 1\n"
            "TRANSFORMER x y 2\nREF a c\n")
    with pytest.raises(TransducerOnPassiveBranch) as info:
        lower(parse(text))
    assert info.value.span == (6, 1)


def test_value_literals_are_exact():
    model = fixture("rlc_two_mesh.net")
    from fractions import Fraction

    assert model.elements_on("l5")[0].value == Fraction(1, 5)


def test_matrix_dump_is_deterministic():
    model = fixture("electromech.net")
    a = emit_equations(compile_q_state(model, exact=True))
    b = emit_equations(compile_q_state(fixture("electromech.net"), exact=True))
    assert a == b
    assert "1/5" in a


def test_golden_series_rlc_dump():
    golden = (FIXTURES / "series_rlc_q.golden").read_bytes()
    dump = emit_equations(compile_q_state(fixture("series_rlc.net"), exact=True))
    assert dump.encode() == golden


def test_static_dump_matches_hand_assembly():
    dump = emit_equations(compile_static_node_potential(fixture("static_example1.net"),
                                                       exact=True))
    assert "K [2x2] cols: A B\n  A : 1 -1/2\n  B : -1/2 3/4\n" in dump
    # rhs d1 (j_f - G v_f) with j_f - G v_f = [5/3, 0, 0, -2]
    f = emit_equations(compile_static_node_potential(fixture("static_example1.net")))
    rhs = [float(line.split(":")[1]) for line in f.split("f(0) [2]\n")[1].splitlines()[:2]]
    np.testing.assert_allclose(rhs, [-5 / 3, 2], atol=1e-15)


def test_json_dump():
    doc = json.loads(emit_equations(compile_q_state(fixture("electromech.net")), "json"))
    assert doc["path"] == "q" and doc["aux"] == ["a_LTL", "a_LTR"]
    assert doc["sources"]["effort"] == {"LJ": "const:-0.1", "LR1": "const:-1.0"}
    with pytest.raises(ValueError):
        emit_equations(compile_q_state(fixture("series_rlc.net")), "yaml")


def test_trajectory_csv():
    system = compile_q_state(fixture("lossless_lc.net"))
    traj = integrate(system, TimeGrid(0.0, 0.1, 4))
    text = emit_trajectory(traj, branches=True)
    lines = text.split("\n")
    assert lines[-1] == "" and len(lines) == 6
    assert lines[0] == "t,q_M1,v_lc,v_ll,j_lc,j_ll"
    assert "\r" not in text
    assert lines[1].split(",")[1] == "0"


def test_trajectory_csv_with_aux_columns():
    system = compile_q_state(fixture("electromech.net"))
    text = emit_trajectory(integrate(system, TimeGrid(0.0, 0.01, 3)))
    assert text.splitlines()[0] == "t,q_M1,q_M2,q_M3,a_LTL,a_LTR"


@settings(max_examples=300, deadline=None, derandomize=True)
@given(st.text(alphabet=st.sampled_from(list("NODEBRANCHMESHREF RLC+-0123456789./@:#\n\tabxyz")),
               max_size=200))
def test_parser_never_crashes(text):
    try:
        lower(parse(text))
    except TontiError:
        pass


# command line --------------------------------------------------------------------------


def test_cli_check_and_meshes():
    code, out, _ = run("check", FIXTURES / "static_example1.net")
    assert code == 0 and out.startswith("ok: 3 nodes, 4 branches, 2 meshes")
    code, out, _ = run("meshes", FIXTURES / "lossless_lc.net")
    assert code == 0 and out == "M1: +ll +lc\n"


def test_cli_equations_golden():
    code, out, _ = run("equations", FIXTURES / "series_rlc.net", "--path", "q")
    assert code == 0
    assert out == (FIXTURES / "series_rlc_q.golden").read_text()


def test_cli_simulate(tmp_path):
    target = tmp_path / "out.csv"
    code, _, _ = run("simulate", FIXTURES / "lossless_lc.net", "--path", "psi", "--t-end", "1",
                     "--dt", "0.01", "--ic", "lc=1", "--branches", "-o", target)
    assert code == 0
    rows = target.read_text().splitlines()
    assert rows[0] == "t,psi_A,v_lc,v_ll,j_lc,j_ll"
    assert len(rows) == 102
    v = float(rows[1].split(",")[2])
    assert v == pytest.approx(1.0)


def test_cli_verify():
    code, out, _ = run("verify", FIXTURES / "electromech.net")
    assert code == 0 and "FAIL" not in out


def test_cli_exit_codes(tmp_path):
    assert run()[0] == 1
    assert run("simulate", FIXTURES / "series_rlc.net", "--path", "q")[0] == 1
    assert run("check", tmp_path / "missing.net")[0] == 1
    bad = tmp_path / "bad.net"
    bad.write_text("NODE A\nBRANCH x A\n")
    code, _, err = run("check", bad)
    assert code == 2 and "line 2" in err
    code, _, err = run("equations", FIXTURES / "series_rlc.net", "--path", "static-node")
    assert code == 2 and "ReactiveElementPresent" in err
    inconsistent = tmp_path / "caps.net"
    inconsistent.write_text("NODE a g\nBRANCH x a g\nBRANCH y a g\nC x 1\nC y 2\nREF g\n")
    code, _, err = run("simulate", inconsistent, "--path", "psi", "--t-end", "0.1", "--dt",
                       "0.05", "--ic", "x=1", "y=2")
    assert code == 3 and "InconsistentIC" in err
