/** Mode badge colors. Waiting green, Recovery yellow, Scanning red,
 * HumanGuiding blue; Avoiding and Contacting get their own colors so
 * every mode is tellable at a glance. */

export const MODE_COLORS: Record<string, string> = {
  Waiting: "#2e7d32",
  Recovery: "#f9a825",
  Scanning: "#c62828",
  HumanGuiding: "#1565c0",
  Avoiding: "#6a1b9a",
  Contacting: "#00838f",
};

export const UNKNOWN_MODE_COLOR = "#546e7a";

export function badgeColor(mode: string): string {
  return MODE_COLORS[mode] ?? UNKNOWN_MODE_COLOR;
}
