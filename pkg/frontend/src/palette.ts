/** Stable entity-id coloring: the chain display is "same color = same entity". */

/** FNV-1a, enough to spread arbitrary entity ids over the hue wheel. */
function hash32(s: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

export function colorFor(entityId: string): string {
  // golden-angle jump keeps nearby ids (e1, e2, ...) visually far apart
  const hue = (hash32(entityId) * 137.50776) % 360;
  return `hsl(${hue.toFixed(1)}, 70%, 42%)`;
}

export function paletteFor(entityIds: string[]): Map<string, string> {
  return new Map(entityIds.map(eid => [eid, colorFor(eid)]));
}
