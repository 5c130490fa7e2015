"""
Module that draws top-down episode trajectories as SVG and as an ASCII grid
"""

# local imports
from src.constants import constants as const
from src.errors import errors as err
# external imports
from xml.sax.saxutils import escape

# pixels per grid cell
CELL_PX = 24
# gap between panels of a case study
PANEL_GAP = 16
COLORS = {'wall': '#444444', 'floor': '#f4f1ea', 'object': '#7a8fa6', 'target': '#e0a100',
          'success': '#2e9d42', 'failure': '#d0312d', 'deadlock': '#6a1b9a'}

def check_trace(scene, trace):
    if trace.scene_id != scene.scene_id:
        raise err.TraceMismatchError(f"The trace belongs to '{trace.scene_id}', not to '{scene.scene_id}'.")
    if not trace.states:
        raise err.TraceMismatchError(f"The trace for '{scene.scene_id}' holds no states.")
    for state in trace.states:
        if not scene.is_free(state.x, state.y):
            raise err.TraceMismatchError(f"The trace visits blocked cell ({state.x}, {state.y}) of '{scene.scene_id}'.")
    if len(trace.actions) != len(trace.states) - 1:
        raise err.TraceMismatchError(f"The trace holds {len(trace.states)} states but {len(trace.actions)} actions.")

def _center(value:int) -> int:
    return value * CELL_PX + CELL_PX // 2

def _panel(scene, trace, label:str='') -> list:
    outcome = 'success' if trace.success else 'failure'
    parts = [f'<rect class="floor" x="0" y="0" width="{scene.width * CELL_PX}" height="{scene.height * CELL_PX}" '
             f'fill="{COLORS["floor"]}"/>']
    for x, y in sorted(scene.walls):
        parts.append(f'<rect class="wall" x="{x * CELL_PX}" y="{y * CELL_PX}" width="{CELL_PX}" height="{CELL_PX}" '
                     f'fill="{COLORS["wall"]}"/>')
    for obj in sorted(scene.objects, key=lambda o: (o.y, o.x, o.category)):
        kind = 'target' if obj.category == trace.target else 'object'
        parts.append(f'<circle class="{kind}" cx="{_center(obj.x)}" cy="{_center(obj.y)}" r="{CELL_PX // 3}" '
                     f'fill="{COLORS[kind]}"><title>{escape(const.CATEGORY_NAMES[obj.category])}</title></circle>')
    points = ' '.join(f'{_center(s.x)},{_center(s.y)}' for s in trace.states)
    parts.append(f'<polyline class="path {outcome}" points="{points}" fill="none" stroke="{COLORS[outcome]}" '
                 f'stroke-width="3"/>')
    start = trace.states[0]
    parts.append(f'<rect class="start" x="{_center(start.x) - 4}" y="{_center(start.y) - 4}" width="8" height="8" '
                 f'fill="{COLORS[outcome]}"/>')
    for step in trace.deadlock_steps:
        state = trace.states[step]
        cx, cy, r = _center(state.x), _center(state.y), CELL_PX // 4
        parts.append(f'<path class="deadlock" d="M{cx - r},{cy - r} L{cx + r},{cy + r} M{cx - r},{cy + r} L{cx + r},{cy - r}" '
                     f'stroke="{COLORS["deadlock"]}" stroke-width="2"/>')
    if label:
        parts.append(f'<text class="label" x="2" y="{scene.height * CELL_PX + 14}" font-size="12">{escape(label)}</text>')
    return parts

def _svg(width:int, height:int, body:list) -> str:
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">'
    return '\n'.join([head, *body, '</svg>']) + '\n'

def render_ascii(scene, trace) -> str:
    """
    '#' wall, 'T' target, 'o' other object, '*' path, 'S' start, 'E' end, 'X' deadlock.
    """
    grid = [['.' for _ in range(scene.width)] for _ in range(scene.height)]
    for x, y in scene.walls:
        grid[y][x] = '#'
    for obj in scene.objects:
        grid[obj.y][obj.x] = 'T' if obj.category == trace.target else 'o'
    for state in trace.states:
        grid[state.y][state.x] = '*'
    for step in trace.deadlock_steps:
        grid[trace.states[step].y][trace.states[step].x] = 'X'
    grid[trace.states[0].y][trace.states[0].x] = 'S'
    grid[trace.states[-1].y][trace.states[-1].x] = 'E'
    outcome = 'success' if trace.success else 'failure'
    header = f"{scene.scene_id} target={const.CATEGORY_NAMES[trace.target]} steps={len(trace.actions)} {outcome}"
    return '\n'.join([header] + [''.join(row) for row in grid]) + '\n'

def render_trajectory(scene, trace) -> tuple:
    """
    Returns (svg text, ascii grid) of one trace.
    """
    check_trace(scene, trace)
    body = ['<g class="trajectory">', *_panel(scene, trace), '</g>']
    svg = _svg(scene.width * CELL_PX, scene.height * CELL_PX, body)
    return svg, render_ascii(scene, trace)

def render_case_study(scene, traces:dict) -> str:
    """
    Several labelled traces of the same episode side by side, one panel per label in insertion order.
    """
    if not traces:
        raise err.TraceMismatchError("A case study needs at least one trace.")
    panel_width = scene.width * CELL_PX
    body = []
    for index, (label, trace) in enumerate(traces.items()):
        check_trace(scene, trace)
        body.append(f'<g class="trajectory" transform="translate({index * (panel_width + PANEL_GAP)},0)">')
        body.extend(_panel(scene, trace, label))
        body.append('</g>')
    width = len(traces) * panel_width + (len(traces) - 1) * PANEL_GAP
    return _svg(width, scene.height * CELL_PX + 20, body)
