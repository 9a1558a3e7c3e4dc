# sla_lab/main.py
from sla_lab.api.cli import main

if __name__ == "__main__":
    main()
