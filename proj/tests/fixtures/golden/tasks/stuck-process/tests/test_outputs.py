def test_done():
    assert True
