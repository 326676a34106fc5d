import { describe, expect, it } from 'vitest';

import { answeredPercent, fmt, tierLabel } from '../src/format';

describe('fmt', () => {
  it('keeps integers whole', () => {
    expect(fmt(3)).toBe('3');
    expect(fmt(0)).toBe('0');
    expect(fmt(-12)).toBe('-12');
  });

  it('trims trailing zeros from six significant digits', () => {
    expect(fmt(412.25)).toBe('412.25');
    expect(fmt(43.5)).toBe('43.5');
    expect(fmt(0.1)).toBe('0.1');
  });

  it('is stable for repeated calls', () => {
    const value = 3.2917438123;
    expect(fmt(value)).toBe(fmt(value));
  });
});

describe('answeredPercent', () => {
  it('computes the answered share of total questions', () => {
    expect(answeredPercent(10, 12)).toBe('83%');
    expect(answeredPercent(12, 12)).toBe('100%');
    expect(answeredPercent(0, 12)).toBe('0%');
  });

  it('treats an empty survey as fully answered', () => {
    expect(answeredPercent(0, 0)).toBe('100%');
  });
});

describe('tierLabel', () => {
  it('names every tier', () => {
    expect(tierLabel('free')).toBe('free');
    expect(tierLabel('low')).toBe('low cost');
    expect(tierLabel('high')).toBe('high cost');
  });
});
