/** Minimal SVG string assembly with stable number formatting. */

export function fmt(v: number): string {
  // fixed precision keeps output byte-identical across runs and platforms
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function el(
  name: string,
  attrs: Record<string, string | number>,
  children: string[] = [],
): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? fmt(v) : esc(v)}"`)
    .join(" ");
  const open = parts.length > 0 ? `<${name} ${parts}` : `<${name}`;
  if (children.length === 0) {
    return `${open}/>`;
  }
  return `${open}>${children.join("")}</${name}>`;
}

export function text(
  x: number,
  y: number,
  label: string,
  attrs: Record<string, string | number> = {},
): string {
  return el("text", { x, y, ...attrs }, [esc(label)]);
}

export function svgDocument(
  width: number,
  height: number,
  children: string[],
): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="11">`,
    el("rect", { x: 0, y: 0, width, height, fill: "#ffffff" }),
    ...children,
    "</svg>",
  ].join("\n");
}
