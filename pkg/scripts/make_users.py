#!/usr/bin/env python3
"""Create or update a credentials file for the review service.

Each run adds (or replaces) one user. Passwords are read from the
terminal unless --password is given, and only scrypt hashes are written.

    python3 scripts/make_users.py --out users.json --user ana --role admin
"""

from __future__ import annotations

import argparse
import getpass
import sys
from pathlib import Path

from pedwatch.service.auth import (
    ROLES,
    User,
    hash_password,
    load_users_file,
    write_users_file,
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="credentials file to write")
    parser.add_argument("--user", required=True, help="user id to add or replace")
    parser.add_argument("--role", choices=ROLES, default="reviewer",
                        help="service role (default reviewer)")
    parser.add_argument("--password", default=None,
                        help="password; omit to be prompted")
    args = parser.parse_args(argv)

    password = args.password or getpass.getpass(f"password for {args.user}: ")
    if not password:
        print("make_users: empty password refused", file=sys.stderr)
        return 1

    path = Path(args.out)
    users = load_users_file(path) if path.exists() else {}
    users[args.user] = User(args.user, hash_password(password), role=args.role)
    write_users_file(path, [users[k] for k in sorted(users)])
    print(f"wrote {path} with {len(users)} user(s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
