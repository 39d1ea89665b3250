#pragma once

// Built-in smoke suite behind `wavemc --mode selftest`: runs the worked
// examples of every operation (exact arithmetic cases plus reduced-size
// Monte Carlo checks) and prints one ok/FAIL line each. Returns the number
// of failures.
int run_selftest(unsigned threads);
