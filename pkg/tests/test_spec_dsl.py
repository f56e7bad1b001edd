import csv
import glob
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GOLDEN_DIR
from probe_helpers.engineLevers import MAX_LIST_NESTING
from spec_dsl import ParseOutcome, SpecEvaluator, eval_spec, parse
from spec_dsl.evaluator import error_code_of
from spec_dsl.lexer import TokenKind, tokenize
from spec_dsl.parser import Name
from spec_dsl.results import RECORD_KEYS, QueryRecord, format_json, format_text
from utils.eventLogger import CSV_HEADER, EvaluationEventLogger, clear_global_logger, init_global_logger

MINIMAL = """\
space bit { backend: classical, states: [0, 1] }
atom x { space: bit }
region R { atoms: [x] }
probe P { region: R, null: true }
bc b { atom: x, weights: [0.5, 0.5] }
"""

QUBIT = """\
space qubit { backend: quantum, n: 2 }
atom t0 { space: qubit }
atom t1 { space: qubit }
region gate { atoms: [t0, t1] }
probe H { region: gate, unitary: [[0.7071067811865476, 0.7071067811865476], [0.7071067811865476, -0.7071067811865476]] }
bc zero { atom: t0, matrix: [[1, 0], [0, 0]] }
bc plus { atom: t1, matrix: [[0.5, 0.5], [0.5, 0.5]] }
query born { kind: value, probe: H, bcs: [zero, plus] }
"""


def _messages(outcome):
    return [d.message for d in outcome.diagnostics]


# =============================================================================
# Lexer
# =============================================================================

def test_lexer_numbers_and_positions():
    tokens, diagnostics = tokenize("x: [1, -2.5e-1, 0.5j, 1-2j] # trailing\n  \"a \\\"b\\\"\"")
    assert diagnostics == []
    numbers = [t.value for t in tokens if t.kind == TokenKind.NUMBER]
    assert numbers == [1.0, -0.25, 0.5j, 1 - 2j]
    string = [t for t in tokens if t.kind == TokenKind.STRING][0]
    assert string.value == 'a "b"'
    assert (string.line, string.column) == (2, 3)
    assert tokens[-1].kind == TokenKind.EOF


def test_lexer_reports_bad_characters_and_strings():
    tokens, diagnostics = tokenize('a @ "open\nb')
    assert [d.message for d in diagnostics] == ["unexpected character '@'", "unterminated string"]
    assert [t.text for t in tokens if t.kind == TokenKind.IDENT] == ["a", "b"]


# =============================================================================
# Parser and validation
# =============================================================================

def test_minimal_spec_parses():
    outcome = parse(MINIMAL)
    assert outcome.ok
    assert outcome.diagnostics == ()
    assert [d.key for d in outcome.ast.declarations] == ["space", "atom", "region", "probe", "bc"]
    probe = outcome.ast.of_key("probe")[0]
    assert probe.get("region") == Name("R", 4, 19)
    assert probe.get("missing", 7) == 7


def test_repeated_atom_is_reported_with_its_line():
    outcome = parse(MINIMAL + "region Twice { atoms: [x, x] }\n")
    assert not outcome.ok
    [diagnostic] = outcome.errors
    assert diagnostic.line == 6
    assert "repeated atom 'x'" in diagnostic.message


def test_undeclared_identifier_is_named():
    outcome = parse(MINIMAL + "query q { kind: value, probe: ghost, bcs: [b] }\n")
    assert not outcome.ok
    assert any("undeclared identifier 'ghost'" in m for m in _messages(outcome))
    assert outcome.errors[0].line == 6


def test_forward_reference_and_wrong_kind():
    text = "atom x { space: later }\nspace later { backend: classical, states: [a] }\n"
    assert any("used before its declaration" in m for m in _messages(parse(text)))
    wrong = parse(MINIMAL + "query q { kind: value, probe: R, bcs: [b] }\n")
    assert any("'R' is a region, expected a probe" in m for m in _messages(wrong))


def test_duplicate_names_and_fields():
    dup = parse(MINIMAL + "atom x { space: bit }\n")
    assert any("duplicate name 'x'" in m for m in _messages(dup))
    field = parse("space s { backend: classical, backend: quantum, states: [a] }")
    assert any("duplicate field 'backend'" in m for m in _messages(field))


def test_payload_and_required_field_checks():
    none = parse(MINIMAL + "probe Q { region: R }\n")
    assert any("needs exactly one of" in m for m in _messages(none))
    two = parse(MINIMAL + "probe Q { region: R, null: true, kernel: [1, 1] }\n")
    assert any("needs exactly one of" in m for m in _messages(two))
    missing = parse("space s { backend: quantum }")
    assert any("missing field 'n'" in m for m in _messages(missing))
    bad_n = parse("space s { backend: quantum, n: 1.5 }")
    assert any("positive integer" in m for m in _messages(bad_n))
    complex_kernel = parse(MINIMAL + "probe Q { region: R, kernel: [1j, 1] }\n")
    assert any("real numbers" in m for m in _messages(complex_kernel))


def test_query_given_rules():
    no_given = parse(MINIMAL + "query q { kind: cond_prob, probe: P, bcs: [b] }\n")
    assert any("missing field 'given'" in m for m in _messages(no_given))
    ignored = parse(MINIMAL + "query q { kind: value, probe: P, bcs: [b], given: P }\n")
    assert ignored.ok
    assert [d.severity for d in ignored.diagnostics] == ["warning"]


def test_unknown_field_is_a_warning():
    outcome = parse(MINIMAL + "atom y { space: bit, colour: red }\n")
    assert outcome.ok
    assert outcome.diagnostics[0].severity == "warning"
    assert "unknown field 'colour'" in outcome.diagnostics[0].message


@pytest.mark.parametrize("text, ignored", [
    ("space s { backend: quantum, n: 2, cone: psd }", ["field 'cone' is ignored by quantum spaces"]),
    ("space s { backend: classical, states: [a], gram: [[1]] }", ["field 'gram' is ignored by classical spaces"]),
    (
        "space s { backend: quantum, n: 2, gram: [[1]], generators: [[1]] }",
        ["field 'gram' is ignored by quantum spaces", "field 'generators' is ignored by quantum spaces"],
    ),
    ("space s { backend: generic, gram: [[1]], n: 3 }", ["field 'n' is ignored by generic spaces"]),
    ("space s { backend: generic, gram: [[1]], generators: [[1]] }", ["field 'generators' is ignored by orthant cones"]),
])
def test_fields_a_backend_does_not_read_are_warnings(text, ignored):
    outcome = parse(text)
    assert outcome.ok
    assert [d.severity for d in outcome.diagnostics] == ["warning"] * len(ignored)
    assert [d.message for d in outcome.diagnostics] == ignored


def test_glue_checks():
    base = MINIMAL + "region S { atoms: [x] }\n"
    assert any("to itself" in m for m in _messages(parse(base + "glue G { regions: [R, R] }\n")))
    assert any("exactly 2" in m for m in _messages(parse(base + "glue G { regions: [R] }\n")))
    not_glue = parse(base + "probe C { region: S, compose: [P, P], glue: S }\n")
    assert any("'S' is not a glue declaration" in m for m in _messages(not_glue))


def test_syntax_errors_recover_at_next_declaration():
    text = "space s { backend classical }\natom a { space: s }\nbogus\nregion R { atoms: [a] }\n"
    outcome = parse(text)
    assert not outcome.ok
    assert [d.key for d in outcome.ast.declarations] == ["space", "atom", "region"]
    lines = [d.line for d in outcome.errors]
    assert lines == sorted(lines)
    assert 1 in lines and 3 in lines


def test_missing_close_brace_is_reported():
    outcome = parse("atom a { space: s\natom b { space: s }\n")
    assert any("missing '}'" in m for m in _messages(outcome))
    assert [d.name for d in outcome.ast.declarations] == ["a", "b"]


def test_list_nesting_limit():
    ok = "probe p { tensor: " + "[" * MAX_LIST_NESTING + "1" + "]" * MAX_LIST_NESTING + " }"
    too_deep = "probe p { tensor: " + "[" * (MAX_LIST_NESTING + 1) + "1" + "]" * (MAX_LIST_NESTING + 1) + " }"
    assert not any("nested deeper" in m for m in _messages(parse(ok)))
    assert any("nested deeper" in m for m in _messages(parse(too_deep)))


def test_trailing_commas_and_semicolons():
    outcome = parse("space s { backend: classical; states: [a, b,], }\n")
    assert outcome.ok
    assert outcome.ast.declarations[0].get("states") == [Name("a", 1, 40), Name("b", 1, 43)]


def test_bytes_input_is_decoded():
    outcome = parse(MINIMAL.encode("utf-8") + b"\xff\xfe")
    assert isinstance(outcome, ParseOutcome)
    assert not outcome.ok


# =============================================================================
# Fuzzing: parse() never raises
# =============================================================================

def _corpus():
    texts = []
    for path in sorted(glob.glob(os.path.join(GOLDEN_DIR, "*.pf"))):
        with open(path, "rb") as fh:
            texts.append(fh.read())
    return texts


def test_parser_survives_random_bytes_and_mutations():
    rng = np.random.default_rng(2024)
    alphabet = np.frombuffer(b'{}[]:,;#"\\\n -+.0123456789jeEabcxyz_\'', dtype=np.uint8)
    corpus = _corpus()
    assert corpus

    for trial in range(70_000):
        size = int(rng.integers(0, 64))
        if trial % 2:
            data = rng.integers(0, 256, size=size, dtype=np.uint8).tobytes()
        else:
            data = rng.choice(alphabet, size=size).tobytes()
        assert isinstance(parse(data), ParseOutcome)

    for trial in range(30_000):
        data = bytearray(corpus[trial % len(corpus)])
        for _ in range(int(rng.integers(1, 6))):
            pos = int(rng.integers(0, len(data)))
            op = int(rng.integers(0, 3))
            if op == 0:
                data[pos] = int(rng.integers(0, 256))
            elif op == 1:
                del data[pos]
            else:
                data.insert(pos, int(rng.choice(alphabet)))
        assert isinstance(parse(bytes(data)), ParseOutcome)


@given(st.text(alphabet=st.sampled_from(list('{}[]:,;#" \n-+.019jeabspcqory_')), max_size=200))
def test_parser_is_total_on_dsl_shaped_text(text):
    outcome = parse(text)
    assert isinstance(outcome, ParseOutcome)
    positions = [(d.line, d.column) for d in outcome.diagnostics]
    assert positions == sorted(positions)


# =============================================================================
# Evaluation
# =============================================================================

def test_hadamard_born_rule():
    [record] = eval_spec(parse(QUBIT).ast)
    assert record.error is None
    assert record.quotient == pytest.approx(1.0, abs=1e-12)
    assert record.denominator == 1.0


def test_classical_chain_is_matrix_product():
    k1 = np.array([[0.5, 0.5], [0.1, 0.9]])
    k2 = np.array([[0.3, 0.7], [0.6, 0.4]])
    text = f"""\
space bit {{ backend: classical, states: [0, 1] }}
atom x {{ space: bit }}
atom y {{ space: bit }}
atom z {{ space: bit }}
region A {{ atoms: [x, y] }}
region B {{ atoms: [y, z] }}
glue AB {{ regions: [A, B] }}
probe K1 {{ region: A, kernel: {k1.tolist()} }}
probe K2 {{ region: B, kernel: {k2.tolist()} }}
probe K {{ region: AB, compose: [K1, K2], glue: AB }}
bc first {{ atom: x, weights: [0, 1] }}
bc last {{ atom: z, weights: [1, 0] }}
query q {{ kind: value, probe: K, bcs: [first, last] }}
"""
    outcome = parse(text)
    assert outcome.ok, outcome.errors
    [record] = eval_spec(outcome.ast)
    assert record.quotient == pytest.approx((k1 @ k2)[1, 0], abs=1e-12)


def test_zero_denominator_does_not_stop_other_queries():
    text = MINIMAL + """\
probe Never { region: R, kernel: [0, 0] }
bc none { atom: x, weights: [0, 0] }
query broken { kind: cond_prob, probe: Never, given: Never, bcs: [b] }
query fine { kind: value, probe: P, bcs: [b] }
query empty { kind: bc_prob, probe: P, bcs: [none], given: [none] }
"""
    records = eval_spec(parse(text).ast)
    assert [r.name for r in records] == ["broken", "fine", "empty"]
    assert error_code_of(records[0]) == "ZeroDenominator"
    assert (records[0].numerator, records[0].denominator, records[0].quotient) == (0.0, 0.0, None)
    assert records[1].quotient == pytest.approx(1.0)
    assert error_code_of(records[2]) == "ZeroDenominator"


def test_failed_declaration_propagates():
    text = QUBIT.replace("[[0.7071067811865476, 0.7071067811865476], [0.7071067811865476, -0.7071067811865476]]", "[[1, 1], [0, 1]]")
    evaluator = SpecEvaluator(parse(text).ast).build()
    assert evaluator.failures["H"].startswith("NonUnitary")
    [record] = evaluator.run_queries()
    assert error_code_of(record) == "FailedDependency"
    assert record.numerator is None


def test_runtime_errors_become_records():
    text = MINIMAL + """\
space qubit { backend: quantum, n: 2 }
atom t { space: qubit }
bc wrong { atom: x, matrix: [[1, 0], [0, 0]] }
bc tb { atom: t, matrix: [[1, 0], [0, 0]] }
query missing_atom { kind: value, probe: P, bcs: [tb] }
"""
    evaluator = SpecEvaluator(parse(text).ast).build()
    assert evaluator.failures["wrong"].startswith("SpaceMismatch")
    [record] = evaluator.run_queries()
    assert record.failed
    assert error_code_of(record) == "IncompleteAssignment"


def test_non_positive_state_is_noted():
    text = QUBIT.replace("matrix: [[1, 0], [0, 0]]", "matrix: [[1.5, 0], [0, -0.5]]")
    [record] = eval_spec(parse(text).ast)
    assert not record.failed
    assert "bc 'zero' is not positive semidefinite" in record.diagnostics


def test_two_bcs_on_one_atom_fail():
    text = MINIMAL + "bc c { atom: x, weights: [1, 0] }\nquery q { kind: value, probe: P, bcs: [b, c] }\n"
    [record] = eval_spec(parse(text).ast)
    assert error_code_of(record) == "DuplicateEntity"


def test_jobs_keep_declaration_order():
    queries = "".join(f"query q{i} {{ kind: value, probe: P, bcs: [b] }}\n" for i in range(20))
    ast = parse(MINIMAL + queries).ast
    serial = eval_spec(ast)
    threaded = eval_spec(ast, jobs=4)
    assert [r.name for r in threaded] == [f"q{i}" for i in range(20)]
    assert threaded == serial


def test_query_selection():
    ast = parse(MINIMAL + "query a { kind: value, probe: P, bcs: [b] }\nquery c { kind: compatibility, probe: P, bcs: [b] }\n").ast
    assert [r.name for r in eval_spec(ast, queries=["c"])] == ["c"]
    with pytest.raises(LookupError):
        eval_spec(ast, queries=["nosuch"])


def test_tolerance_governs_bound_diagnostics():
    text = MINIMAL + """\
probe Big { region: R, kernel: [1.0000001, 1.0000001] }
query q { kind: cond_prob, probe: Big, given: P, bcs: [b] }
"""
    ast = parse(text).ast
    [strict] = eval_spec(ast)
    [loose] = eval_spec(ast, tolerance=1e-3)
    assert any("outside [0, 1]" in d for d in strict.diagnostics)
    assert loose.diagnostics == ()


# =============================================================================
# Results and event logs
# =============================================================================

def test_json_records_have_fixed_keys():
    import json

    records = [
        QueryRecord("a", "value", 0.1, 1.0, 0.1),
        QueryRecord("b", "cond_prob", 1.0, 0.0, None, "ZeroDenominator: boom"),
    ]
    rows = json.loads(format_json(records))
    assert [tuple(r) for r in rows] == [RECORD_KEYS, RECORD_KEYS]
    assert rows[0]["quotient"] == 0.1
    assert rows[1]["quotient"] is None
    assert json.loads(format_json([])) == []


def test_text_lines():
    text = format_text([QueryRecord("a", "value", 0.25, 1.0, 0.25), QueryRecord("b", "value", error="X: y")])
    assert text.splitlines() == ["a: 0.25 (0.25/1)", "b: ERROR X: y"]


def test_event_logs_are_written(tmp_path):
    logger = EvaluationEventLogger(str(tmp_path), "qubit")
    eval_spec(parse(QUBIT).ast, event_logger=logger)
    folder = tmp_path / "events_qubit"
    with open(folder / "events_born.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_HEADER
    assert [r[0].split(":")[0] for r in rows[1:]] == ["query_created", "query_started", "query_finished"]
    assert (folder / "evaluation_timestamps.csv").is_file()
    assert [q.query_name for q in logger.query_loggers] == ["born"]


def test_global_event_logger_is_used(tmp_path):
    init_global_logger(str(tmp_path), "minimal")
    try:
        eval_spec(parse(MINIMAL + "query q { kind: value, probe: P, bcs: [b] }\n").ast)
    finally:
        clear_global_logger()
    assert (tmp_path / "events_minimal" / "events_q.csv").is_file()
