import pytest
from hypothesis import given, strategies as st

from tracelab.errors import ValidationError
from tracelab.wspec import (
    AdditiveCharOfRational,
    Conjugate,
    Constant,
    DeltaAt,
    HyperKloosterman,
    MultCharOfRational,
    PolyValueCount,
    Product,
    PullbackMonomial,
    RatFunc,
    Scalar,
    ValueSetIndicator,
    parse_spec,
    spec_hash,
    to_sexpr,
)

coeffs = st.lists(st.integers(-9, 9), min_size=1, max_size=4).map(tuple)
polys = coeffs.filter(lambda c: any(c[1:])).map(RatFunc)
rats = st.builds(lambda n, d: RatFunc(n, d), coeffs.filter(lambda c: c[-1] != 0), st.just((0, 1)))
funcs = st.one_of(polys, rats)
numbers = st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False)

leaves = st.one_of(
    st.builds(AdditiveCharOfRational, funcs),
    st.builds(MultCharOfRational, st.integers(0, 50), funcs),
    st.builds(HyperKloosterman, st.integers(2, 5)),
    st.builds(PolyValueCount, polys),
    st.builds(ValueSetIndicator, polys),
    st.builds(DeltaAt, st.integers(-5, 100)),
    st.builds(Constant, numbers),
)
specs = st.recursive(
    leaves,
    lambda inner: st.one_of(
        st.builds(Product, inner, inner),
        st.builds(Conjugate, inner),
        st.builds(Scalar, numbers, inner),
        st.builds(PullbackMonomial, inner, st.integers(1, 50), st.integers(-3, 3).filter(bool)),
    ),
    max_leaves=6,
)


@given(specs)
def test_roundtrip(spec):
    text = to_sexpr(spec)
    back = parse_spec(text)
    assert to_sexpr(back) == text
    assert spec_hash(back) == spec_hash(spec)


def test_canonical_examples():
    spec = parse_spec("(product (kloosterman 2)   (addchar (poly 0 2)))")
    assert spec == Product(HyperKloosterman(2), AdditiveCharOfRational(RatFunc((0, 2))))
    assert to_sexpr(spec) == "(product (kloosterman 2) (addchar (poly 0 2)))"
    assert to_sexpr(parse_spec("(const 1)")) == "(const 1 0)"
    assert to_sexpr(parse_spec("(addchar (rat (poly 1) (poly 0 1)))")) == "(addchar (rat (poly 1) (poly 0 1)))"


def test_hash_is_stable_and_distinguishes():
    a = spec_hash(parse_spec("(kloosterman 2)"))
    assert a == spec_hash(HyperKloosterman(2))
    assert a != spec_hash(HyperKloosterman(3))
    assert 0 <= a < 2**64


@pytest.mark.parametrize(
    "text",
    ["(kloosterman 1)", "(kloosterman)", "(bogus 1)", "(addchar 3)", "((", "(delta 1))", "(pullback (delta 1) 2 0)", "(delta x)"],
)
def test_parse_errors(text):
    with pytest.raises(ValidationError):
        parse_spec(text)


def test_polynomial_only_constructors():
    with pytest.raises(ValidationError):
        PolyValueCount(RatFunc((1,), (0, 1)))
