import datetime as dt

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ticktca.errors import DataError, ValidationError
from ticktca.marketdata import (DAILY_COLUMNS, DEFAULT_WINDOWS, FxRate, FxTable, SecurityDay, SplitRatio,
                                adjust_for_splits, adjust_frame, parse_daily, parse_orders, read_daily_frame,
                                read_order_frames, records_to_frame, slice_samples, to_usd, truncate_windows,
                                write_daily)

HEADER = ",".join(DAILY_COLUMNS) + "\n"


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_parse_single_row(tmp_path):
    p = write(tmp_path / "daily.csv", HEADER + "7203,2014-01-10,6300,1.0,1000000,5000\n")
    (rec,) = parse_daily(p)
    assert rec == SecurityDay("7203", dt.date(2014, 1, 10), 6300.0, 1.0, 1_000_000.0, 5000)
    assert rec.exec_size == 200.0


def test_negative_close_names_line(tmp_path):
    p = write(tmp_path / "daily.csv", HEADER + "7203,2014-01-10,6300,1.0,10,1\n7203,2014-01-14,-5,1.0,10,1\n")
    with pytest.raises(DataError, match=r"daily\.csv:3"):
        parse_daily(p)
    with pytest.raises(DataError, match=r":3"):
        read_daily_frame(p)


@pytest.mark.parametrize("body, needle", [
    ("7203,2014-01-10,6300,1.0,10,1\n7203,2014-01-10,6300,1.0,10,1\n", "duplicate"),
    ("7203,2014-13-10,6300,1.0,10,1\n", "date"),
    ("7203,2014-01-10,6300,1.0,0,3\n", "trade_count"),
    ("7203,2014-01-10,6300,1.0,10,1.5\n", "trade_count"),
    ("7203,2014-01-10,6300,1.0,10\n", "fields"),
])
def test_malformed_rows(tmp_path, body, needle):
    with pytest.raises(DataError, match=needle):
        parse_daily(write(tmp_path / "d.csv", HEADER + body))


def test_missing_header(tmp_path):
    with pytest.raises(DataError, match="header"):
        parse_daily(write(tmp_path / "d.csv", "security_id,date\n"))
    with pytest.raises(DataError, match="empty"):
        parse_daily(write(tmp_path / "e.csv", ""))


def test_full_universe_round_trip(tmp_path):
    days = pd.bdate_range("2013-07-01", periods=370)
    recs = [SecurityDay(f"{1000 + i}", d.date(), 1000.0 + i, 1.0, 1e5, 50) for i in range(100) for d in days]
    p = tmp_path / "daily.csv"
    write_daily(recs, p)
    back = parse_daily(p)
    assert len(back) == 37_000
    assert back == sorted(recs, key=lambda r: (r.security_id, r.date))
    frame = read_daily_frame(p)
    pd.testing.assert_frame_equal(frame, records_to_frame(back))


def test_split_adjustment():
    rec = SecurityDay("A", dt.date(2014, 1, 6), 1000.0, 2.0, 100.0, 10)
    after = SecurityDay("A", dt.date(2014, 1, 8), 510.0, 1.0, 300.0, 10)
    out = adjust_for_splits([rec, after], [SplitRatio("A", dt.date(2014, 1, 7), 2.0)])
    assert (out[0].close_price, out[0].avg_spread, out[0].volume, out[0].trade_count) == (500.0, 1.0, 200.0, 10)
    assert out[1] == after
    with pytest.raises(ValueError):
        SplitRatio("A", dt.date(2014, 1, 7), 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(10, 1e5), st.floats(1, 1e7), st.sampled_from([0.5, 2.0, 3.0, 10.0]))
def test_split_preserves_turnover(close, volume, ratio):
    rec = SecurityDay("A", dt.date(2014, 1, 6), close, 1.0, volume, 1)
    (adj,) = adjust_for_splits([rec], [SplitRatio("A", dt.date(2014, 2, 1), ratio)])
    assert adj.close_price * adj.volume == pytest.approx(close * volume, rel=1e-12)


def test_adjust_frame_matches_records():
    recs = [SecurityDay(s, dt.date(2014, 1, d), 100.0 + d, 1.0, 10.0 * d, d) for s in "AB" for d in range(6, 11)]
    splits = [SplitRatio("A", dt.date(2014, 1, 8), 2.0), SplitRatio("B", dt.date(2014, 1, 10), 5.0)]
    pd.testing.assert_frame_equal(adjust_frame(records_to_frame(recs), splits),
                                  records_to_frame(adjust_for_splits(recs, splits)))


def test_fx_lookup():
    fx = FxTable([FxRate(dt.date(2014, 1, 10), 100.0)])
    assert to_usd(1_000_000, dt.date(2014, 1, 10), fx) == 10_000.0
    assert to_usd(1_000_000, dt.date(2014, 1, 13), fx) == 10_000.0
    assert to_usd(0, dt.date(2014, 1, 10), fx) == 0.0
    with pytest.raises(DataError):
        fx.rate(dt.date(2014, 1, 9))
    with pytest.raises(DataError):
        fx.rate(dt.date(2014, 2, 10))
    days = np.array(["2014-01-10", "2014-01-12"], dtype="datetime64[D]")
    np.testing.assert_array_equal(fx.rates_for(days), [100.0, 100.0])


def test_sample_membership():
    recs = [SecurityDay("A", d, 1.0, 0.0, 0.0, 0) for d in
            (dt.date(2014, 1, 10), dt.date(2014, 7, 22), dt.date(2014, 1, 13))]
    out = slice_samples(recs)
    member = {lab: {r.date for r in v} for lab, v in out.items()}
    assert {k for k, v in member.items() if dt.date(2014, 1, 10) in v} == {"SF", "S1", "S4"}
    assert {k for k, v in member.items() if dt.date(2014, 7, 22) in v} == {"SF", "S3", "S5"}
    assert {k for k, v in member.items() if dt.date(2014, 1, 13) in v} == {"SF", "S4"}


def test_truncate_windows():
    cut = truncate_windows(DEFAULT_WINDOWS, dt.date(2014, 10, 30))
    assert [w.label for w in cut] == [w.label for w in DEFAULT_WINDOWS]
    assert max(w.end for w in cut) == dt.date(2014, 10, 30)
    assert [w.label for w in truncate_windows(DEFAULT_WINDOWS, dt.date(2014, 1, 12))] == ["SF", "S1", "S4"]


ORDERS_HEADER = "order_id,security_id,side,arrival_date,arrival_price_yen,total_shares\n"
FILLS_HEADER = "order_id,seq,price_yen,shares\n"


def test_orders_join(tmp_path):
    o = write(tmp_path / "o.csv", ORDERS_HEADER + "a,7203,Buy,2014-01-10,100,30\nb,7203,sell,2014-01-10,100,5\n")
    f = write(tmp_path / "f.csv", FILLS_HEADER + "a,2,100,10\na,1,101,10\na,3,102,10\nb,1,99,5\n")
    a, b = parse_orders(o, f)
    assert [x.price for x in a.fills] == [101, 100, 102]
    assert b.side.sign == -1
    orders, fills = read_order_frames(o, f)
    assert list(fills["price_yen"]) == [101, 100, 102, 99]
    assert list(orders["side"]) == ["Buy", "Sell"]


@pytest.mark.parametrize("fills, needle", [
    ("a,1,100,10\n", "not fully filled"),
    ("a,1,100,30\nzz,1,100,1\n", "orphan"),
    ("a,1,100,15\na,1,100,15\n", "seq"),
])
def test_orders_join_errors(tmp_path, fills, needle):
    o = write(tmp_path / "o.csv", ORDERS_HEADER + "a,7203,Buy,2014-01-10,100,30\n")
    f = write(tmp_path / "f.csv", FILLS_HEADER + fills)
    with pytest.raises(DataError, match=needle):
        read_order_frames(o, f)
    if needle != "seq":
        with pytest.raises(DataError, match=needle):
            parse_orders(o, f)


def test_fx_rejects_nonpositive():
    with pytest.raises(ValidationError):
        FxTable({dt.date(2014, 1, 1): 0.0})
