from narrative_topics.export import dumps_json, fmt_float, percent


def test_six_significant_digits():
    assert fmt_float(1 / 3) == "0.333333"
    assert fmt_float(123456789.0) == "1.23457e+08"
    assert fmt_float(2.0) == "2"


def test_percent_rounds_half_to_even():
    assert percent(0.3965) == "39.6"
    assert percent(0.3975) == "39.8"
    assert percent(21250 / 53569) == "39.7"


def test_json_sorted_and_rounded():
    text = dumps_json({"b": 1 / 3, "a": [2.0, float("inf")]})
    assert text == '{\n  "a": [\n    2.0,\n    null\n  ],\n  "b": 0.333333\n}\n'
