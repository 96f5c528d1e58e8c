_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): acceptance criterion check")


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        item.user_properties.append(("acceptance", marker.args[0]))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    label = props.get("acceptance")
    if label is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _ACCEPTANCE[label] = (report.outcome, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0])):
        outcome, detail = _ACCEPTANCE[label]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {label}: {detail}")
