import sys

from django.conf import settings
from django.core.management import execute_from_command_line


def main(argv=None):
    if not settings.configured:
        settings.configure(INSTALLED_APPS=["robustnas"])
    execute_from_command_line(["robustnas", *(argv or sys.argv[1:])])


if __name__ == "__main__":
    main()
