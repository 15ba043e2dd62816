import logging
from typing import Any, Dict, List, Optional

from jinja2 import Template, TemplateError

from src.errors import ConfigError
from src.harness.bench import BenchReport

logger = logging.getLogger("rvsim.harness.report")

# Published averages for the dual-PC core, the buffered core and the two
# comparison cores; measured on the Embench suite.
REFERENCE_VALUES: List[Dict[str, Any]] = [
    {"core": "dual-PC fetch, gshare", "config": "dualpc/gshare", "ipc": 0.857, "hit_rate": 0.788},
    {"core": "buffered fetch, gshare", "config": "buffer/gshare", "ipc": 0.846, "hit_rate": 0.798},
    {"core": "comparison core, no predictor", "config": None, "ipc": 0.649, "hit_rate": None},
    {"core": "comparison core, bimodal", "config": None, "ipc": 0.795, "hit_rate": 0.779},
]

DEFAULT_TEMPLATE = """
## Bench report

**Programs**: {{ programs|length }}
**Configurations**: {{ configs|join(", ") }}
**Cells**: {{ cells }} ({{ failures|length }} failed)

### IPC per program

{{ ipc_table }}

### Averages

| config | mean IPC | mean hit rate |
|--------|----------|---------------|
{% for row in means -%}
| {{ row.config }} | {{ fmt(row.ipc) }} | {{ fmt(row.hit_rate) }} |
{% endfor %}
### Checks

- Instruction counts across configurations: {% if mismatches %}MISMATCH in {{ mismatches|join(", ") }}{% else %}identical{% endif %}
{% for check in directional -%}
- Mean IPC dualpc > buffer ({{ check.bpred }}): {{ "yes" if check.holds else "NO" }} ({{ fmt(check.dualpc_ipc) }} vs {{ fmt(check.buffer_ipc) }})
- Mean IPCs within (0.5, 1.0) ({{ check.bpred }}): {{ "yes" if check.in_range else "no" }}
{% endfor %}
{%- if failures %}
### Failed cells

{% for row in failures -%}
- {{ row.program }} [{{ row.config }}]: {{ row.status }}{% if row.error %} ({{ row.error }}){% endif %}
{% endfor %}
{%- endif %}
### Reference values

| core | average IPC | average hit rate | measured IPC | measured hit rate |
|------|-------------|------------------|--------------|-------------------|
{% for ref in references -%}
| {{ ref.core }} | {{ fmt(ref.ipc) }} | {{ fmt(ref.hit_rate) }} | {{ fmt(ref.measured_ipc) }} | {{ fmt(ref.measured_hit_rate) }} |
{% endfor %}
"""


def _fmt(value: Optional[float]) -> str:
    return "N/A" if value is None else f"{value:.3f}"


def _with_measured(ref: Dict[str, Any], report: BenchReport) -> Dict[str, Any]:
    known = ref["config"] in report.configs
    return {
        **ref,
        "measured_ipc": report.mean_ipc(ref["config"]) if known else None,
        "measured_hit_rate": report.mean_hit_rate(ref["config"]) if known else None,
    }


def render_report(report: BenchReport, template_path: Optional[str] = None) -> str:
    """Render the bench report, optionally from a user-supplied template."""
    try:
        if template_path:
            logger.info(f"Using custom template: {template_path}")
            with open(template_path) as f:
                template = Template(f.read())
        else:
            template = Template(DEFAULT_TEMPLATE)
        return template.render(
            programs=report.programs,
            configs=report.configs,
            cells=len(report.rows),
            failures=report.failures,
            ipc_table=report.ipc_table(),
            means=[
                {"config": c, "ipc": report.mean_ipc(c), "hit_rate": report.mean_hit_rate(c)}
                for c in report.configs
            ],
            mismatches=sorted(report.instruction_mismatches()),
            directional=report.directional_checks(),
            references=[_with_measured(ref, report) for ref in REFERENCE_VALUES],
            fmt=_fmt,
        ).strip() + "\n"
    except (IOError, TemplateError) as e:
        raise ConfigError(f"Failed to render report: {str(e)}", "E_REPORT_TEMPLATE",
                          {"template": template_path})
