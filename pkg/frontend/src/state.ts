import type { Period } from "./types";

export interface Selection {
  index: number;
  members: string[];
}

export interface HoverTarget {
  kind: "correlation-cell" | "stock-line";
  key: string;
}

type Listener = (state: ViewState) => void;

/**
 * Cross-view UI state. The focused portfolio always belongs to some current
 * selection; selections are ordered by creation.
 */
export class ViewState {
  period: Period | null = null;
  selections: Selection[] = [];
  focusedId: string | null = null;
  hover: HoverTarget | null = null;
  pendingJobs: Set<string> = new Set();

  private listeners: Listener[] = [];
  private nextSelection = 1;

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this);
  }

  setPeriod(period: Period): void {
    this.period = period;
    this.emit();
  }

  addSelection(members: string[]): Selection {
    const selection = { index: this.nextSelection++, members: [...members] };
    this.selections.push(selection);
    this.emit();
    return selection;
  }

  clearSelections(): void {
    this.selections = [];
    this.focusedId = null;
    this.emit();
  }

  focus(id: string): void {
    const selected = this.selections.some((s) => s.members.includes(id));
    if (!selected) {
      throw new Error(`cannot focus ${id}: not in any current selection`);
    }
    this.focusedId = id;
    this.emit();
  }

  setHover(target: HoverTarget | null): void {
    this.hover = target;
    this.emit();
  }
}
