/**
 * Canonical JSON: keys sorted at every level, compact separators, ASCII-safe.
 *
 * The engine's logs and digests use this form; the adapter needs it only as
 * a stable identity key for harnesses (the "already tried" set), so the one
 * hard requirement is that two structurally equal documents always render to
 * the same string.
 */

export type JsonValue =
  | null
  | boolean
  | number
  | string
  | JsonValue[]
  | { [key: string]: JsonValue };

function escapeString(s: string): string {
  // JSON.stringify leaves non-ASCII characters raw; escape them so the form
  // matches ASCII-only canonical output byte for byte.
  return JSON.stringify(s).replace(/[-￿]/g, (ch) => {
    return "\\u" + ch.charCodeAt(0).toString(16).padStart(4, "0");
  });
}

export function canonicalJson(value: JsonValue): string {
  if (value === null || typeof value === "boolean") {
    return JSON.stringify(value);
  }
  if (typeof value === "number") {
    if (!Number.isFinite(value)) {
      throw new Error("canonical JSON cannot hold NaN or infinity");
    }
    return JSON.stringify(value);
  }
  if (typeof value === "string") {
    return escapeString(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  const keys = Object.keys(value).sort();
  const parts = keys.map((k) => escapeString(k) + ":" + canonicalJson(value[k]));
  return "{" + parts.join(",") + "}";
}
