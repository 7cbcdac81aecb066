from pathlib import Path


def test_file_exists():
    assert Path('/app/total.txt').exists()


def test_total():
    assert Path('/app/total.txt').read_text().strip() == '42'
