/** Sequence-number bookkeeping for the chunk stream. */

export class GapDetector {
  private expected: number | null = null;
  received = 0;
  gaps = 0;
  skippedSeqs = 0;

  /** Feed one sequence number; returns how many numbers were skipped. */
  feed(seq: number): number {
    this.received += 1;
    if (this.expected === null) {
      this.expected = seq + 1;
      return 0;
    }
    const skipped = seq - this.expected;
    this.expected = seq + 1;
    if (skipped > 0) {
      this.gaps += 1;
      this.skippedSeqs += skipped;
      return skipped;
    }
    return 0;
  }
}
