"""Test classifier speaking FAIRGEN-PROTO 1 on stdin/stdout.

Modes (first argv):
  echo            always RESULT <id> melanoma 1.0
  truncate        drop the final response before END
  malformed       emit one garbage line instead of a RESULT
  badscore        emit a score outside [0, 1]
  no-handshake    reply with a wrong greeting
"""

import sys


def main():
    mode = sys.argv[1] if len(sys.argv) > 1 else "echo"
    greeting = sys.stdin.readline().strip()
    if greeting != "FAIRGEN-PROTO 1":
        return 1
    print("WRONG-PROTO" if mode == "no-handshake" else "FAIRGEN-PROTO 1", flush=True)
    pending = []
    for line in sys.stdin:
        line = line.strip()
        if line == "END":
            break
        parts = line.split()
        if len(parts) != 3 or parts[0] != "PREDICT":
            print(f"RESULT {parts[1] if len(parts) > 1 else 'unknown'} error 0.0", flush=True)
            continue
        pending.append(parts[1])
        sid = parts[1]
        if mode == "truncate" and len(pending) == 5:
            print("END", flush=True)
            return 0
        if mode == "malformed" and len(pending) == 3:
            print("THIS IS NOT A RESULT", flush=True)
            continue
        if mode == "badscore":
            print(f"RESULT {sid} melanoma 1.5", flush=True)
            continue
        print(f"RESULT {sid} melanoma 1.0", flush=True)
    print("END", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
